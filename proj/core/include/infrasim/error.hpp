#pragma once

#include <stdexcept>
#include <string>

namespace infrasim
{
    class Error : public std::runtime_error
    {
    public:
        using std::runtime_error::runtime_error;
    };

    /// Malformed input document. The message carries line/field context.
    class ParseError : public Error
    {
    public:
        using Error::Error;
    };

    /// A document parsed but violates a network or scenario invariant.
    class ValidationError : public Error
    {
    public:
        using Error::Error;
    };

    class UnknownComponentError : public Error
    {
    public:
        explicit UnknownComponentError(std::string const& id)
            : Error("unknown component id '" + id + "'")
        {
        }
    };

    /// A numerical solver failed to converge or hit an unreachable state.
    class SolverError : public Error
    {
    public:
        using Error::Error;
    };
}
