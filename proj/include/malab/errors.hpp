#pragma once

#include <stdexcept>
#include <string>

namespace malab {

// Base for all domain errors thrown by the library. The CLI maps these to
// exit codes; everything else (bad flags, unreadable files) is reported by
// the CLI layer itself.
struct Error : std::runtime_error {
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Geometry that collapsed below tolerance: flat point sets handed to hull or
// ellipsoid routines, zero-volume bodies, sections too thin to normalize.
struct DegenerateBody : Error {
  explicit DegenerateBody(const std::string& msg) : Error("degenerate body: " + msg) {}
};

// A finite-difference stencil reached outside the solved region.
struct BoundaryStencil : Error {
  explicit BoundaryStencil(const std::string& msg) : Error("boundary stencil: " + msg) {}
};

// Newton/lifting iteration failed to reach the residual target.
struct NoConvergence : Error {
  explicit NoConvergence(const std::string& msg) : Error("no convergence: " + msg) {}
};

// Target masses are inconsistent (nonpositive, or not summing to |Omega| f-mass).
struct InfeasibleMass : Error {
  explicit InfeasibleMass(const std::string& msg) : Error("infeasible mass: " + msg) {}
};

// Nodal values fail the discrete convexity check where convexity is required.
struct NonConvexInput : Error {
  explicit NonConvexInput(const std::string& msg) : Error("non-convex input: " + msg) {}
};

// Lookup of a named domain / density / experiment failed.
struct UnknownName : Error {
  explicit UnknownName(const std::string& msg) : Error("unknown name: " + msg) {}
};

// A section (or its dilation) is not compactly contained where it must be.
struct EscapesDomain : Error {
  explicit EscapesDomain(const std::string& msg) : Error("escapes domain: " + msg) {}
};

// No admissible section height exists at a requested center.
struct NoPositiveHeight : Error {
  explicit NoPositiveHeight(const std::string& msg) : Error("no positive height: " + msg) {}
};

// Normalization postcondition B(0,1) c T(K) c B(0,n) failed.
struct InclusionViolation : Error {
  explicit InclusionViolation(const std::string& msg) : Error("inclusion violation: " + msg) {}
};

// The greedy covering terminated with uncovered target points.
struct NotCovered : Error {
  explicit NotCovered(const std::string& msg) : Error("not covered: " + msg) {}
};

// A section contains no grid nodes (height below resolution).
struct EmptySection : Error {
  explicit EmptySection(const std::string& msg) : Error("empty section: " + msg) {}
};

// The contact set of a convex envelope came out empty.
struct EmptyContactSet : Error {
  explicit EmptyContactSet(const std::string& msg) : Error("empty contact set: " + msg) {}
};

// An ellipsoid / body has aspect ratio beyond what downstream steps accept.
struct ShapeDegeneracy : Error {
  explicit ShapeDegeneracy(const std::string& msg) : Error("shape degeneracy: " + msg) {}
};

// A serialized file does not carry the schema this build reads/writes.
struct MixedSchema : Error {
  explicit MixedSchema(const std::string& msg) : Error("mixed schema: " + msg) {}
};

}  // namespace malab
