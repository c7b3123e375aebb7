#include "permsig/preprocess.hpp"

#include <algorithm>
#include <cmath>

#include "permsig/diagnostics.hpp"
#include "permsig/errors.hpp"

namespace permsig {
namespace {

std::vector<double> rescale_axis(const std::vector<double>& values, const char* axis,
                                 const SignatureTrace& trace) {
  const auto [lo_it, hi_it] = std::minmax_element(values.begin(), values.end());
  const double lo = *lo_it;
  const double hi = *hi_it;
  if (!std::isfinite(lo) || !std::isfinite(hi)) {
    throw ValidationError(std::string("non-finite coordinate on axis ") + axis);
  }
  std::vector<double> out(values.size());
  if (hi == lo) {
    warn(std::string("constant ") + axis + " axis in trace of subject '" +
         trace.subject_id + "' sample " + std::to_string(trace.sample_index) +
         "; mapped to 0.5");
    std::fill(out.begin(), out.end(), 0.5);
    return out;
  }
  const double range = hi - lo;
  for (std::size_t i = 0; i < values.size(); ++i) {
    out[i] = (values[i] - lo) / range;
  }
  return out;
}

std::vector<double> tangents(std::span<const double> y) {
  const std::size_t n = y.size();
  std::vector<double> m(n);
  m[0] = y[1] - y[0];
  m[n - 1] = y[n - 1] - y[n - 2];
  for (std::size_t i = 1; i + 1 < n; ++i) m[i] = 0.5 * (y[i + 1] - y[i - 1]);
  return m;
}

double evaluate_segment(std::span<const double> y, const std::vector<double>& m, double u) {
  const std::size_t last = y.size() - 1;
  u = std::clamp(u, 0.0, static_cast<double>(last));
  auto i = static_cast<std::size_t>(std::floor(u));
  if (i >= last) i = last - 1;
  const double t = u - static_cast<double>(i);
  const double t2 = t * t;
  const double t3 = t2 * t;
  const double h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
  const double h10 = t3 - 2.0 * t2 + t;
  const double h01 = -2.0 * t3 + 3.0 * t2;
  const double h11 = t3 - t2;
  return h00 * y[i] + h10 * m[i] + h01 * y[i + 1] + h11 * m[i + 1];
}

}  // namespace

std::string_view to_string(Label label) {
  return label == Label::genuine ? "genuine" : "forgery";
}

Label parse_label(std::string_view text) {
  if (text == "genuine" || text == "G" || text == "g") return Label::genuine;
  if (text == "forgery" || text == "F" || text == "f") return Label::forgery;
  throw ValidationError("unknown label '" + std::string(text) + "'");
}

void SignatureTrace::validate() const {
  if (x.size() != y.size()) {
    throw LengthError("x and y lengths differ (" + std::to_string(x.size()) + " vs " +
                      std::to_string(y.size()) + ")");
  }
  if (x.size() < 2) throw LengthError("trace needs at least 2 points");
}

SignatureTrace rescale_unit_square(const SignatureTrace& trace) {
  trace.validate();
  SignatureTrace out = trace;
  out.x = rescale_axis(trace.x, "x", trace);
  out.y = rescale_axis(trace.y, "y", trace);
  return out;
}

std::vector<double> hermite_evaluate(std::span<const double> values,
                                     std::span<const double> parameters) {
  if (values.size() < 2) throw LengthError("interpolation needs at least 2 knots");
  const std::vector<double> m = tangents(values);
  std::vector<double> out;
  out.reserve(parameters.size());
  for (double u : parameters) out.push_back(evaluate_segment(values, m, u));
  return out;
}

std::vector<double> hermite_resample(std::span<const double> values, std::size_t length) {
  if (length < 2) throw ParameterError("resample length must be >= 2");
  if (values.size() < 2) throw LengthError("interpolation needs at least 2 knots");
  const std::vector<double> m = tangents(values);
  const auto span = static_cast<double>(values.size() - 1);
  const auto steps = static_cast<double>(length - 1);
  std::vector<double> out(length);
  for (std::size_t k = 0; k < length; ++k) {
    out[k] = evaluate_segment(values, m, static_cast<double>(k) * span / steps);
  }
  out.front() = values.front();
  out.back() = values.back();
  return out;
}

SignatureTrace hermite_resample(const SignatureTrace& trace, std::size_t length) {
  trace.validate();
  SignatureTrace out = trace;
  out.x = hermite_resample(trace.x, length);
  out.y = hermite_resample(trace.y, length);
  for (auto* axis : {&out.x, &out.y}) {
    for (double& v : *axis) v = std::clamp(v, 0.0, 1.0);
  }
  out.target_length = length;
  return out;
}

SignatureTrace preprocess(const SignatureTrace& trace, std::size_t length) {
  SignatureTrace out = hermite_resample(rescale_unit_square(trace), length);
  out.preprocessed = true;
  return out;
}

}  // namespace permsig
