#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace permsig {

enum class Label { genuine, forgery };

std::string_view to_string(Label label);
/// Accepts "genuine"/"forgery" (also "G"/"F"); throws ValidationError otherwise.
Label parse_label(std::string_view text);

inline constexpr std::size_t kDefaultResampleLength = 2000;

/// Pen trajectory. Pressure and pen angles are not carried.
struct SignatureTrace {
  std::vector<double> x;
  std::vector<double> y;
  std::string subject_id;
  Label label = Label::genuine;
  int sample_index = 0;
  bool preprocessed = false;
  std::size_t target_length = kDefaultResampleLength;

  std::size_t size() const noexcept { return x.size(); }
  /// Throws LengthError unless x and y have equal length >= 2.
  void validate() const;
};

/// Per-axis min-max scaling into [0,1]. A constant axis becomes 0.5
/// everywhere and triggers a warning.
SignatureTrace rescale_unit_square(const SignatureTrace& trace);

/// Evaluates the piecewise cubic Hermite interpolant of `values` (knots at
/// integer parameters 0..L-1) at the given parameters. Interior tangents are
/// centred differences, endpoint tangents one-sided differences. Parameters
/// outside [0, L-1] are clamped to the range.
std::vector<double> hermite_evaluate(std::span<const double> values,
                                     std::span<const double> parameters);

/// Resamples one axis to `length` points spanning the original index range.
/// The first and last values are reproduced exactly.
std::vector<double> hermite_resample(std::span<const double> values, std::size_t length);

/// Resamples both axes to `length` points and clamps them to [0,1].
/// Inputs longer than `length` are downsampled through the same interpolant.
SignatureTrace hermite_resample(const SignatureTrace& trace, std::size_t length);

/// rescale_unit_square followed by hermite_resample; marks the trace
/// preprocessed.
SignatureTrace preprocess(const SignatureTrace& trace,
                          std::size_t length = kDefaultResampleLength);

}  // namespace permsig
