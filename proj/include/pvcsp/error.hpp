#pragma once

#include <stdexcept>
#include <string>

namespace pvcsp {

// Base class for all domain errors; the CLI maps these to exit code 1.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

#define PVCSP_DEFINE_ERROR(Name)                                               \
    struct Name : Error {                                                      \
        using Error::Error;                                                    \
    }

PVCSP_DEFINE_ERROR(UndefinedArithmetic);
PVCSP_DEFINE_ERROR(ParseError);
PVCSP_DEFINE_ERROR(ArityMismatch);
PVCSP_DEFINE_ERROR(UnknownSymbol);
PVCSP_DEFINE_ERROR(RoleViolation);
PVCSP_DEFINE_ERROR(SignatureMismatch);
PVCSP_DEFINE_ERROR(BudgetExceeded);
PVCSP_DEFINE_ERROR(InvalidParameter);
PVCSP_DEFINE_ERROR(Disconnected);
PVCSP_DEFINE_ERROR(TooSmall);
PVCSP_DEFINE_ERROR(MalformedProgram);
PVCSP_DEFINE_ERROR(DimensionMismatch);
PVCSP_DEFINE_ERROR(MalformedDistribution);
PVCSP_DEFINE_ERROR(InternalError);
PVCSP_DEFINE_ERROR(ProtocolViolation);
PVCSP_DEFINE_ERROR(ScheduleExceeded);

#undef PVCSP_DEFINE_ERROR

} // namespace pvcsp
