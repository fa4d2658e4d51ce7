// Shared vocabulary types, error classes and small string helpers.

#ifndef AXABSA_COMMON_HPP_
#define AXABSA_COMMON_HPP_

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cctype>
#include <compare>
#include <stdexcept>
#include <string>
#include <string_view>

namespace axabsa {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Index = Eigen::Index;

// Input that violates a documented format or invariant. The CLI maps this to
// exit code 1; every other exception maps to exit code 2.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline std::string to_lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

inline bool is_lowercase(std::string_view s) {
  return std::none_of(s.begin(), s.end(),
                      [](unsigned char c) { return std::isupper(c) != 0; });
}

// Universal Dependencies v2 UPOS inventory.
inline constexpr std::array<std::string_view, 17> kUposTags = {
    "ADJ", "ADP",  "ADV",   "AUX",   "CCONJ", "DET", "INTJ", "NOUN", "NUM",
    "PART", "PRON", "PROPN", "PUNCT", "SCONJ", "SYM", "VERB", "X"};

inline bool is_upos(std::string_view tag) {
  return std::find(kUposTags.begin(), kUposTags.end(), tag) != kUposTags.end();
}

// One (aspect-class, sentiment-polarity) prediction.
struct LabelTuple {
  std::string aspect;
  std::string sentiment;

  friend auto operator<=>(const LabelTuple&, const LabelTuple&) = default;
  friend bool operator==(const LabelTuple&, const LabelTuple&) = default;
};

inline constexpr std::string_view kPositive = "positive";
inline constexpr std::string_view kNegative = "negative";

inline bool is_pn_polarity(std::string_view polarity) {
  return polarity == kPositive || polarity == kNegative;
}

}  // namespace axabsa

#endif  // AXABSA_COMMON_HPP_
