#include "pathgan/error.hpp"

namespace pathgan {

const char* err_name(Err kind) {
  switch (kind) {
    case Err::EmptyScanpath: return "EmptyScanpath";
    case Err::CoordinateOutOfRange: return "CoordinateOutOfRange";
    case Err::NonMonotoneTimestamps: return "NonMonotoneTimestamps";
    case Err::EmptySaccadeList: return "EmptySaccadeList";
    case Err::InvalidAlignment: return "InvalidAlignment";
    case Err::NonFiniteCost: return "NonFiniteCost";
    case Err::MixedImageIds: return "MixedImageIds";
    case Err::MissingPredictions: return "MissingPredictions";
    case Err::TooFewImages: return "TooFewImages";
    case Err::AllZeroSaliencyMap: return "AllZeroSaliencyMap";
    case Err::ImageTooSmall: return "ImageTooSmall";
    case Err::EmptySequence: return "EmptySequence";
    case Err::LengthMismatch: return "LengthMismatch";
    case Err::ShapeMismatch: return "ShapeMismatch";
    case Err::UndecodableImage: return "UndecodableImage";
    case Err::FixationOutsideImage: return "FixationOutsideImage";
    case Err::BadMagic: return "BadMagic";
    case Err::TruncatedData: return "TruncatedData";
    case Err::UnsupportedMaxval: return "UnsupportedMaxval";
    case Err::ParseError: return "ParseError";
    case Err::ValidationError: return "ValidationError";
    case Err::NoFixations: return "NoFixations";
    case Err::BinMismatch: return "BinMismatch";
    case Err::UsageError: return "UsageError";
  }
  return "Error";
}

}  // namespace pathgan
