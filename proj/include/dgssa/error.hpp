#pragma once

#include <stdexcept>
#include <string>

namespace dgssa {

enum class Errc {
  EmptyRoi,
  InsufficientArea,
  DimensionMismatch,
  UnknownOp,
  NoMixers,
  SingleClass,
  TooFewDomains,
  ZeroVariance,
  LengthMismatch,
  EmptyList,
  MissingPair,
  Io,
  Format,
  Usage,
  InvalidArgument,
};

inline const char* errc_name(Errc code) {
  switch (code) {
    case Errc::EmptyRoi: return "EmptyRoi";
    case Errc::InsufficientArea: return "InsufficientArea";
    case Errc::DimensionMismatch: return "DimensionMismatch";
    case Errc::UnknownOp: return "UnknownOp";
    case Errc::NoMixers: return "NoMixers";
    case Errc::SingleClass: return "SingleClass";
    case Errc::TooFewDomains: return "TooFewDomains";
    case Errc::ZeroVariance: return "ZeroVariance";
    case Errc::LengthMismatch: return "LengthMismatch";
    case Errc::EmptyList: return "EmptyList";
    case Errc::MissingPair: return "MissingPair";
    case Errc::Io: return "Io";
    case Errc::Format: return "Format";
    case Errc::Usage: return "Usage";
    case Errc::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

/// Library-wide exception. Every failure carries a machine-readable code.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace dgssa
