#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace fpx {

// Every failure the library reports is an fpx::Error; subclasses name the
// condition so callers can catch selectively.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

#define FPX_DEFINE_ERROR(Name)                  \
    class Name : public Error {                 \
    public:                                     \
        using Error::Error;                     \
    }

FPX_DEFINE_ERROR(InvalidMap);
FPX_DEFINE_ERROR(EmptyRegion);
FPX_DEFINE_ERROR(SchemaError);
FPX_DEFINE_ERROR(SeedOnWall);
FPX_DEFINE_ERROR(ParamError);
FPX_DEFINE_ERROR(InvalidPose);
FPX_DEFINE_ERROR(PredictorUnavailable);
FPX_DEFINE_ERROR(AlignmentError);
FPX_DEFINE_ERROR(TooSmall);
FPX_DEFINE_ERROR(EmptyGraph);
FPX_DEFINE_ERROR(NoRooms);
FPX_DEFINE_ERROR(BadRoomId);
FPX_DEFINE_ERROR(NoReachableFrontier);
FPX_DEFINE_ERROR(ProtocolError);
FPX_DEFINE_ERROR(IoError);

#undef FPX_DEFINE_ERROR

class OutOfBounds : public Error {
public:
    OutOfBounds(double x, double y)
        : Error("point (" + std::to_string(x) + ", " + std::to_string(y) + ") is outside the map"),
          x_(x), y_(y) {}
    double x() const noexcept { return x_; }
    double y() const noexcept { return y_; }

private:
    double x_;
    double y_;
};

class Unreachable : public Error {
public:
    explicit Unreachable(std::size_t explored)
        : Error("goal unreachable after exploring " + std::to_string(explored) + " cells"),
          explored_(explored) {}
    std::size_t explored() const noexcept { return explored_; }

private:
    std::size_t explored_;
};

}  // namespace fpx
