#pragma once

#include <stdexcept>
#include <string>

namespace fbp {

/// Base class for every error raised by the library. The category lets the
/// command-line runner map failures onto its exit-code contract.
class Error : public std::runtime_error {
public:
    enum class Kind {
        configuration,
        resolution,
        input,
        domain,
        stencil,
        geometry,
        operator_failure,
        invariant,
        no_interface,
    };

    Error(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}

    Kind kind() const noexcept { return kind_; }

private:
    Kind kind_;
};

#define FBP_DEFINE_ERROR(Name, KindValue)                                  \
    class Name : public Error {                                            \
    public:                                                                \
        explicit Name(const std::string& what) : Error(KindValue, what) {} \
    };

FBP_DEFINE_ERROR(ConfigError, Kind::configuration)
FBP_DEFINE_ERROR(ResolutionError, Kind::resolution)
FBP_DEFINE_ERROR(InputError, Kind::input)
FBP_DEFINE_ERROR(DomainError, Kind::domain)
FBP_DEFINE_ERROR(StencilError, Kind::stencil)
FBP_DEFINE_ERROR(GeometryError, Kind::geometry)
FBP_DEFINE_ERROR(OperatorError, Kind::operator_failure)
FBP_DEFINE_ERROR(InvariantError, Kind::invariant)
FBP_DEFINE_ERROR(NoInterfaceError, Kind::no_interface)

#undef FBP_DEFINE_ERROR

}  // namespace fbp
