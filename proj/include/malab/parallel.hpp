#pragma once

#include <algorithm>
#include <cstdlib>
#include <thread>
#include <vector>

namespace malab {

// Worker count: MA_LAB_JOBS, or --jobs via setJobs(), else hardware count.
inline int& jobsOverride() {
  static int j = 0;
  return j;
}
inline void setJobs(int j) { jobsOverride() = j; }

inline int jobCount() {
  if (jobsOverride() > 0) return jobsOverride();
  if (const char* env = std::getenv("MA_LAB_JOBS")) {
    const int j = std::atoi(env);
    if (j > 0) return j;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw ? static_cast<int>(hw) : 1;
}

// Static block partition of [0,n). Deterministic: the result of any
// parallel_for must not depend on scheduling, so bodies write only to
// their own index slots.
template <class F>
inline void parallelFor(int n, F&& body) {
  const int jobs = std::min(jobCount(), n);
  if (jobs <= 1) {
    for (int i = 0; i < n; ++i) body(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(jobs);
  for (int w = 0; w < jobs; ++w) {
    const int lo = static_cast<int>(static_cast<long long>(n) * w / jobs);
    const int hi = static_cast<int>(static_cast<long long>(n) * (w + 1) / jobs);
    pool.emplace_back([lo, hi, &body] {
      for (int i = lo; i < hi; ++i) body(i);
    });
  }
  for (auto& t : pool) t.join();
}

}  // namespace malab
