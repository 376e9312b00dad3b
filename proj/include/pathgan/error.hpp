#pragma once

#include <stdexcept>
#include <string>

namespace pathgan {

enum class Err {
  // scanpath validation
  EmptyScanpath,
  CoordinateOutOfRange,
  NonMonotoneTimestamps,
  // metric
  EmptySaccadeList,
  InvalidAlignment,
  // assignment / evaluation
  NonFiniteCost,
  MixedImageIds,
  MissingPredictions,
  // baselines
  TooFewImages,
  AllZeroSaliencyMap,
  // model
  ImageTooSmall,
  EmptySequence,
  LengthMismatch,
  ShapeMismatch,
  // preprocessing
  UndecodableImage,
  FixationOutsideImage,
  // pgm
  BadMagic,
  TruncatedData,
  UnsupportedMaxval,
  // loaders / stats
  ParseError,
  ValidationError,
  NoFixations,
  BinMismatch,
  // cli
  UsageError,
};

const char* err_name(Err kind);

class Error : public std::runtime_error {
 public:
  Error(Err kind, const std::string& msg)
      : std::runtime_error(std::string(err_name(kind)) + ": " + msg), kind_(kind) {}
  Err kind() const noexcept { return kind_; }

 private:
  Err kind_;
};

[[noreturn]] inline void fail(Err kind, const std::string& msg) { throw Error(kind, msg); }

}  // namespace pathgan
