#pragma once

#include <stdexcept>
#include <string>

namespace eosscan {

/// Base of every error raised by the toolkit.
class Error : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

#define EOSSCAN_DEFINE_ERROR(Name)          \
    class Name : public Error               \
    {                                       \
    public:                                 \
        using Error::Error;                 \
    }

EOSSCAN_DEFINE_ERROR(MalformedBinary);
EOSSCAN_DEFINE_ERROR(UnsupportedVersion);
EOSSCAN_DEFINE_ERROR(UnresolvableBranch);
EOSSCAN_DEFINE_ERROR(UnknownBlock);
EOSSCAN_DEFINE_ERROR(WidthMismatch);
EOSSCAN_DEFINE_ERROR(AddressOverflow);
EOSSCAN_DEFINE_ERROR(UnsupportedInstruction);
EOSSCAN_DEFINE_ERROR(EmulationException);
EOSSCAN_DEFINE_ERROR(InvalidName);
EOSSCAN_DEFINE_ERROR(NoDispatcher);
EOSSCAN_DEFINE_ERROR(MalformedLog);

#undef EOSSCAN_DEFINE_ERROR

}  // namespace eosscan
