#pragma once

#include <stdexcept>
#include <string>

namespace slicetrain {

// Every domain failure carries a stable name (e.g. "NonWatertightMesh") that
// the CLI prints on the diagnostic stream.
class Error : public std::runtime_error {
public:
    Error(std::string name, const std::string& detail)
        : std::runtime_error(name + ": " + detail), name_(std::move(name)) {}

    const std::string& name() const noexcept { return name_; }

private:
    std::string name_;
};

#define SLICETRAIN_DEFINE_ERROR(Type)                                           \
    class Type : public Error {                                                 \
    public:                                                                     \
        explicit Type(const std::string& detail) : Error(#Type, detail) {}     \
    }

// geometry
SLICETRAIN_DEFINE_ERROR(NonWatertightMesh);
SLICETRAIN_DEFINE_ERROR(DegeneratePlane);
SLICETRAIN_DEFINE_ERROR(DegenerateLoop);
SLICETRAIN_DEFINE_ERROR(CrossingLoops);
SLICETRAIN_DEFINE_ERROR(MeshFormatError);

// shapes
SLICETRAIN_DEFINE_ERROR(InvalidSpec);

// tasks
SLICETRAIN_DEFINE_ERROR(UnknownTask);
SLICETRAIN_DEFINE_ERROR(SessionComplete);
SLICETRAIN_DEFINE_ERROR(InvalidMode);

// session log
SLICETRAIN_DEFINE_ERROR(NonMonotonicTimestamp);
SLICETRAIN_DEFINE_ERROR(MalformedLog);
SLICETRAIN_DEFINE_ERROR(VersionMismatch);

// io
SLICETRAIN_DEFINE_ERROR(IoError);

// assessment
SLICETRAIN_DEFINE_ERROR(DistinctnessUnreachable);
SLICETRAIN_DEFINE_ERROR(PreconditionViolation);

#undef SLICETRAIN_DEFINE_ERROR

// Hidden control or a mutation attempted in solution mode. When raised during
// replay, event_index is the offending log line (otherwise -1).
class ControlNotAvailable : public Error {
public:
    explicit ControlNotAvailable(const std::string& detail, long event_index = -1)
        : Error("ControlNotAvailable", detail), event_index_(event_index) {}

    long event_index() const noexcept { return event_index_; }

private:
    long event_index_;
};

}  // namespace slicetrain
