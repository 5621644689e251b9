// Conversions between scalar age labels, one-hot vectors and Gaussian label
// distributions over L discrete age bins (bins are 1-based: 1..L).
#pragma once

#include <vector>

namespace agedist {

inline constexpr int kDefaultBins = 101;   // ages 0..100 mapped to bins 1..101
inline constexpr double kDefaultSigma = 2.0;

// Discrete Gaussian centred at `label`, evaluated on the integer grid 1..L
// and renormalised to sum exactly 1. Throws std::invalid_argument for
// L < 2, sigma <= 0 or label outside [1, L].
std::vector<double> encode_gaussian(int label, int bins, double sigma = kDefaultSigma);

// Binary indicator vector with a single 1 at the label's bin.
std::vector<double> encode_onehot(int label, int bins);

// Index (1-based) of the largest entry; ties resolve to the smallest index.
// Throws std::invalid_argument on an empty vector.
int decode_argmax(const std::vector<double>& probs);

// True when every entry is in [0, 1] and the entries sum to 1 within `tol`.
bool is_distribution(const std::vector<double>& probs, double tol = 1e-12);

}  // namespace agedist
