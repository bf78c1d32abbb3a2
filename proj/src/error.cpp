#include "forkrace/error.hpp"

namespace forkrace {

std::string_view to_string(Errc code) {
    switch (code) {
        case Errc::InvalidPool: return "InvalidPool";
        case Errc::AlreadyForked: return "AlreadyForked";
        case Errc::NotForked: return "NotForked";
        case Errc::InvalidFork: return "InvalidFork";
        case Errc::InvalidRelease: return "InvalidRelease";
        case Errc::NotAnUncle: return "NotAnUncle";
        case Errc::NephewUnavailable: return "NephewUnavailable";
        case Errc::NoData: return "NoData";
        case Errc::MergeShapeError: return "MergeShapeError";
        case Errc::NoCrossing: return "NoCrossing";
        case Errc::Incomplete: return "Incomplete";
        case Errc::InvalidConfig: return "InvalidConfig";
        case Errc::ConfigError: return "ConfigError";
        case Errc::IoError: return "IoError";
    }
    return "Unknown";
}

}  // namespace forkrace
