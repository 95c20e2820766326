#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace steklov {

/// Base class for every error raised by the library. The `module()` tag is
/// prefixed to CLI diagnostics.
class Error : public std::runtime_error {
public:
    Error(std::string module, const std::string& what)
        : std::runtime_error(module + ": " + what), module_(std::move(module)) {}

    const std::string& module() const noexcept { return module_; }

private:
    std::string module_;
};

class DegenerateBoundary : public Error {
public:
    explicit DegenerateBoundary(const std::string& what) : Error("geometry", what) {}
};

class EmptyDiameterSet : public Error {
public:
    EmptyDiameterSet() : Error("geometry", "diameter report has no pairs") {}
};

class SelfIntersection : public Error {
public:
    SelfIntersection(std::size_t edge_i, std::size_t edge_j)
        : Error("meshing", "polyline edges " + std::to_string(edge_i) + " and " +
                               std::to_string(edge_j) + " intersect"),
          edge_i(edge_i), edge_j(edge_j) {}

    std::size_t edge_i;
    std::size_t edge_j;
};

class MeshFailure : public Error {
public:
    explicit MeshFailure(const std::string& what) : Error("meshing", what) {}
};

class SolverFailure : public Error {
public:
    explicit SolverFailure(const std::string& what) : Error("fem", what) {}
};

class ZeroBoundaryTrace : public Error {
public:
    ZeroBoundaryTrace() : Error("fem", "test function has vanishing boundary trace") {}
};

class ClusteredEigenvalue : public Error {
public:
    ClusteredEigenvalue(int k, double gap)
        : Error("shape_gradient", "eigenvalue " + std::to_string(k) +
                                      " is clustered (relative gap " + std::to_string(gap) + ")"),
          k(k), gap(gap) {}

    int k;
    double gap;
};

class ProjectionFailure : public Error {
public:
    explicit ProjectionFailure(const std::string& what) : Error("optimizer", what) {}
};

class ConfigError : public Error {
public:
    ConfigError(std::string key, const std::string& what)
        : Error("config", key + ": " + what), key(std::move(key)) {}

    std::string key;
};

} // namespace steklov
