// Synthetic multi-domain, multi-subject dataset generation and file I/O for
// the subject-exclusive cross-dataset protocol at desk scale.
//
// Each domain stands in for a capture setup: it mixes a fixed low-dimensional
// age basis through its own matrix and offset and adds its own feature noise.
// Subjects carry one latent age; every image of a subject keeps the latent
// features (plus fresh noise) while its recorded label gets an independent
// +-1 jitter, mimicking repeated captures with imperfect annotations.
#pragma once

#include <cstdint>
#include <set>
#include <string>
#include <vector>

namespace agedist {

struct Sample {
    int subject_id = 0;
    int domain_id = 0;
    int age = 0;  // in [1, bins]
    std::vector<double> features;

    bool operator==(const Sample&) const = default;
};

struct SampleSet {
    std::vector<Sample> samples;
    int feature_dim = 0;
    int bins = 0;

    bool operator==(const SampleSet&) const = default;
};

struct DomainSpec {
    int domain_id = 0;
    // Row-major feature_dim x kAgeBasisDim mixing matrix and feature offset.
    std::vector<double> mixing;
    std::vector<double> offset;
    double noise_std = 0.0;
};

inline constexpr int kAgeBasisDim = 5;

// Basis [t, t^2, t^3, sin(2 pi t), cos(2 pi t)] with t = age / bins.
std::vector<double> age_basis(int age, int bins);

// Domain 0 gets a reference random mixing; every further domain perturbs it
// by `severity` times a fresh random matrix/offset, so `severity` controls
// the parameter distance between domains (the shift strength).
std::vector<DomainSpec> make_domain_specs(int n_domains, int feature_dim,
                                          double noise_std, double severity,
                                          std::uint64_t seed);

// Subjects get latent ages stratified over ten equal slices of [1, bins]
// (subject k lands in slice k mod 10), which guarantees a non-empty age
// decile once subjects_per_domain >= 10. Deterministic given the seed.
SampleSet generate(const std::vector<DomainSpec>& domains, int subjects_per_domain,
                   int images_per_subject, int bins, int feature_dim,
                   std::uint64_t seed);

struct SplitResult {
    SampleSet train;
    SampleSet test;
    // Test-side samples dropped because their subject also appears in a
    // train domain.
    int dropped_overlap = 0;
};

// Partition by domain id; subjects seen on the train side are excluded from
// the test side so the subject sets of the two outputs never intersect.
// Throws on overlapping domain sets or when either side ends up empty.
SplitResult split_sc(const SampleSet& data, const std::set<int>& train_domains,
                     const std::set<int>& test_domains);

std::set<int> subject_ids(const SampleSet& data);
std::set<int> domain_ids(const SampleSet& data);

// Delimited text format, one sample per line:
//   agedist-dataset,v1,D,<feature_dim>,L,<bins>
//   <subject_id>,<domain_id>,<age>,<f_0>,...,<f_{D-1}>
// Lines starting with '#' are comments. Features are written with 17
// significant digits so save/load round-trips exactly.
void save_dataset(const std::string& path, const SampleSet& data,
                  const std::vector<std::string>& header_comments = {});
SampleSet load_dataset(const std::string& path);

}  // namespace agedist
