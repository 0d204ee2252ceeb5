/* errors.hpp */

#ifndef IMAGIMAP_ERRORS_HPP
#define IMAGIMAP_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace imagimap {

/* Invalid scalar argument (even kernel size, non-positive width, ...) */
class ParameterError : public std::invalid_argument
{
public:
    using std::invalid_argument::invalid_argument;
};

/* Grids or tensors whose shapes do not agree */
class DimensionError : public std::invalid_argument
{
public:
    using std::invalid_argument::invalid_argument;
};

/* Requested grid exceeds the configured maximum */
class SizeError : public std::length_error
{
public:
    using std::length_error::length_error;
};

/* Operation called outside its precondition (e.g. pose inside an obstacle) */
class PreconditionError : public std::logic_error
{
public:
    using std::logic_error::logic_error;
};

/* Malformed or inconsistent configuration */
class ConfigError : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

/* Required input file absent or unreadable */
class MissingInputError : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

/* Runtime check of a mapping invariant failed */
class InvariantViolation : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

/* Malformed binary or text file */
class FormatError : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

/* Process exit codes of the command-line tool */
enum ExitCode : int
{
    kExitOk = 0,
    kExitFailure = 1,
    kExitConfig = 2,
    kExitMissingInput = 3,
    kExitInvariant = 4,
};

/* Exit code for an exception escaping a command */
inline int ExitCodeFor(const std::exception& e) noexcept
{
    if (dynamic_cast<const ConfigError*>(&e) != nullptr)
        return kExitConfig;
    if (dynamic_cast<const MissingInputError*>(&e) != nullptr ||
        dynamic_cast<const FormatError*>(&e) != nullptr)
        return kExitMissingInput;
    if (dynamic_cast<const InvariantViolation*>(&e) != nullptr)
        return kExitInvariant;
    return kExitFailure;
}

} // namespace imagimap

#endif // IMAGIMAP_ERRORS_HPP
