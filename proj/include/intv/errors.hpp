#pragma once

#include <stdexcept>
#include <string>

namespace intv {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct EmptyTraceError : Error { using Error::Error; };
struct IndexError : Error { using Error::Error; };
struct ConfigError : Error { using Error::Error; };
struct ParseError : Error { using Error::Error; };
struct ConditioningError : Error { using Error::Error; };
struct NoDataError : Error { using Error::Error; };
struct GroupSizeError : Error { using Error::Error; };
struct GroupCollectError : Error { using Error::Error; };
struct NoErrorFoundError : Error { using Error::Error; };
struct TemplateError : Error { using Error::Error; };
struct DanglingInterventionError : Error { using Error::Error; };
struct WriteError : Error { using Error::Error; };
struct DomainError : Error { using Error::Error; };
struct SetUnscorableError : Error { using Error::Error; };
struct BackendUnavailableError : Error { using Error::Error; };
struct ProtocolError : Error { using Error::Error; };
struct FeatureUnsupportedError : Error { using Error::Error; };
struct SchemaError : Error { using Error::Error; };

}  // namespace intv
