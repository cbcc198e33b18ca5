#pragma once

#include <stdexcept>
#include <string>

namespace trixel {

enum class Errc {
  IoFailure,
  BadFormat,
  ImageTooSmall,
  DegenerateEyes,
  TooFewVertices,
  MeshMismatch,
  EmptyForeground,
  EmptyBackground,
  NoEdges,
  EmptyClass,
  EmptyMask,
  BboxOutOfRange,
  SingleClass,
  LayoutMismatch,
  LengthMismatch,
  TooFewSamples,
  DimMismatch,
  NoMasks,
  NoRecords,
};

inline const char* errc_name(Errc c) {
  switch (c) {
    case Errc::IoFailure:       return "IoFailure";
    case Errc::BadFormat:       return "BadFormat";
    case Errc::ImageTooSmall:   return "ImageTooSmall";
    case Errc::DegenerateEyes:  return "DegenerateEyes";
    case Errc::TooFewVertices:  return "TooFewVertices";
    case Errc::MeshMismatch:    return "MeshMismatch";
    case Errc::EmptyForeground: return "EmptyForeground";
    case Errc::EmptyBackground: return "EmptyBackground";
    case Errc::NoEdges:         return "NoEdges";
    case Errc::EmptyClass:      return "EmptyClass";
    case Errc::EmptyMask:       return "EmptyMask";
    case Errc::BboxOutOfRange:  return "BboxOutOfRange";
    case Errc::SingleClass:     return "SingleClass";
    case Errc::LayoutMismatch:  return "LayoutMismatch";
    case Errc::LengthMismatch:  return "LengthMismatch";
    case Errc::TooFewSamples:   return "TooFewSamples";
    case Errc::DimMismatch:     return "DimMismatch";
    case Errc::NoMasks:         return "NoMasks";
    case Errc::NoRecords:       return "NoRecords";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

[[noreturn]] inline void fail(Errc code, const std::string& what) { throw Error(code, what); }

inline void require(bool cond, Errc code, const std::string& what) {
  if (!cond) fail(code, what);
}

}  // namespace trixel
