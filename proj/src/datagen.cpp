#include "agedist/datagen.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "agedist/kvconfig.hpp"
#include "agedist/rng.hpp"

namespace agedist {

std::vector<double> age_basis(int age, int bins) {
    const double t = static_cast<double>(age) / static_cast<double>(bins);
    return {t, t * t, t * t * t, std::sin(2.0 * std::numbers::pi * t),
            std::cos(2.0 * std::numbers::pi * t)};
}

std::vector<DomainSpec> make_domain_specs(int n_domains, int feature_dim,
                                          double noise_std, double severity,
                                          std::uint64_t seed) {
    if (n_domains < 1 || feature_dim < 2) {
        throw std::invalid_argument("make_domain_specs: need >= 1 domain and D >= 2");
    }
    if (noise_std < 0.0 || severity < 0.0) {
        throw std::invalid_argument("make_domain_specs: negative noise or severity");
    }
    Rng rng(seed);
    std::vector<double> base_mixing(static_cast<std::size_t>(feature_dim) * kAgeBasisDim);
    for (double& v : base_mixing) v = rng.gaussian();

    std::vector<DomainSpec> specs;
    specs.reserve(n_domains);
    for (int d = 0; d < n_domains; ++d) {
        DomainSpec spec;
        spec.domain_id = d;
        spec.mixing = base_mixing;
        spec.offset.assign(feature_dim, 0.0);
        spec.noise_std = noise_std;
        if (d > 0) {
            for (double& v : spec.mixing) v += severity * rng.gaussian();
            for (double& v : spec.offset) v += severity * rng.gaussian();
        }
        specs.push_back(std::move(spec));
    }
    return specs;
}

SampleSet generate(const std::vector<DomainSpec>& domains, int subjects_per_domain,
                   int images_per_subject, int bins, int feature_dim,
                   std::uint64_t seed) {
    if (domains.empty() || subjects_per_domain < 1 || images_per_subject < 1) {
        throw std::invalid_argument("generate: counts must be at least 1");
    }
    if (bins < 2 || feature_dim < 2) {
        throw std::invalid_argument("generate: bins and feature dim must be >= 2");
    }
    for (const DomainSpec& d : domains) {
        if (d.mixing.size() != static_cast<std::size_t>(feature_dim) * kAgeBasisDim ||
            d.offset.size() != static_cast<std::size_t>(feature_dim)) {
            throw std::invalid_argument("generate: domain spec shape mismatch");
        }
    }

    Rng rng(seed);
    SampleSet set;
    set.feature_dim = feature_dim;
    set.bins = bins;
    set.samples.reserve(static_cast<std::size_t>(domains.size()) * subjects_per_domain *
                        images_per_subject);

    int next_subject = 0;
    for (const DomainSpec& dom : domains) {
        for (int s = 0; s < subjects_per_domain; ++s) {
            // Stratified latent age: slice s mod 10 of [1, bins].
            const int stratum = s % 10;
            const int lo = (stratum * bins) / 10 + 1;
            const int hi = ((stratum + 1) * bins) / 10;
            const int latent_age = rng.uniform_int(lo, std::max(lo, hi));

            std::vector<double> latent(feature_dim);
            const std::vector<double> basis = age_basis(latent_age, bins);
            for (int i = 0; i < feature_dim; ++i) {
                double v = dom.offset[i];
                for (int j = 0; j < kAgeBasisDim; ++j) {
                    v += dom.mixing[static_cast<std::size_t>(i) * kAgeBasisDim + j] *
                         basis[j];
                }
                latent[i] = v;
            }

            for (int img = 0; img < images_per_subject; ++img) {
                Sample sample;
                sample.subject_id = next_subject;
                sample.domain_id = dom.domain_id;
                sample.age = std::clamp(latent_age + rng.uniform_int(-1, 1), 1, bins);
                sample.features.resize(feature_dim);
                for (int i = 0; i < feature_dim; ++i) {
                    sample.features[i] =
                        latent[i] +
                        (dom.noise_std > 0.0 ? rng.gaussian(0.0, dom.noise_std) : 0.0);
                }
                set.samples.push_back(std::move(sample));
            }
            ++next_subject;
        }
    }
    return set;
}

std::set<int> subject_ids(const SampleSet& data) {
    std::set<int> ids;
    for (const Sample& s : data.samples) ids.insert(s.subject_id);
    return ids;
}

std::set<int> domain_ids(const SampleSet& data) {
    std::set<int> ids;
    for (const Sample& s : data.samples) ids.insert(s.domain_id);
    return ids;
}

SplitResult split_sc(const SampleSet& data, const std::set<int>& train_domains,
                     const std::set<int>& test_domains) {
    for (int d : train_domains) {
        if (test_domains.count(d)) {
            throw std::invalid_argument("split_sc: domain " + std::to_string(d) +
                                        " appears on both sides");
        }
    }

    SplitResult result;
    result.train.feature_dim = result.test.feature_dim = data.feature_dim;
    result.train.bins = result.test.bins = data.bins;

    std::set<int> train_subjects;
    for (const Sample& s : data.samples) {
        if (train_domains.count(s.domain_id)) {
            result.train.samples.push_back(s);
            train_subjects.insert(s.subject_id);
        }
    }
    for (const Sample& s : data.samples) {
        if (!test_domains.count(s.domain_id)) continue;
        if (train_subjects.count(s.subject_id)) {
            ++result.dropped_overlap;  // subject stays on the train side only
        } else {
            result.test.samples.push_back(s);
        }
    }

    if (result.train.samples.empty() || result.test.samples.empty()) {
        throw std::invalid_argument("split_sc: a side of the split is empty");
    }
    return result;
}

namespace {

[[noreturn]] void malformed(const std::string& path, int line_no, const std::string& why) {
    throw std::runtime_error(path + ":" + std::to_string(line_no) + ": " + why);
}

}  // namespace

void save_dataset(const std::string& path, const SampleSet& data,
                  const std::vector<std::string>& header_comments) {
    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error("save_dataset: cannot open " + path);
    }
    for (const std::string& line : header_comments) {
        out << "# " << line << "\n";
    }
    out << "agedist-dataset,v1,D," << data.feature_dim << ",L," << data.bins << "\n";
    for (const Sample& s : data.samples) {
        out << s.subject_id << ',' << s.domain_id << ',' << s.age;
        for (double f : s.features) out << ',' << format_double(f);
        out << "\n";
    }
    if (!out) {
        throw std::runtime_error("save_dataset: write failed for " + path);
    }
}

SampleSet load_dataset(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("load_dataset: cannot open " + path);
    }
    SampleSet set;
    std::string line;
    int line_no = 0;
    bool header_seen = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line[0] == '#') continue;

        std::vector<std::string> fields;
        std::stringstream ss(line);
        std::string field;
        while (std::getline(ss, field, ',')) fields.push_back(field);

        if (!header_seen) {
            if (fields.size() != 6 || fields[0] != "agedist-dataset" ||
                fields[2] != "D" || fields[4] != "L") {
                malformed(path, line_no, "bad dataset header");
            }
            if (fields[1] != "v1") {
                malformed(path, line_no, "unsupported dataset version '" + fields[1] + "'");
            }
            try {
                set.feature_dim = std::stoi(fields[3]);
                set.bins = std::stoi(fields[5]);
            } catch (const std::exception&) {
                malformed(path, line_no, "non-numeric header dimensions");
            }
            if (set.feature_dim < 2 || set.bins < 2) {
                malformed(path, line_no, "header dimensions out of range");
            }
            header_seen = true;
            continue;
        }

        if (fields.size() != static_cast<std::size_t>(3 + set.feature_dim)) {
            malformed(path, line_no,
                      "expected " + std::to_string(3 + set.feature_dim) + " fields, got " +
                          std::to_string(fields.size()));
        }
        Sample s;
        try {
            s.subject_id = std::stoi(fields[0]);
            s.domain_id = std::stoi(fields[1]);
            s.age = std::stoi(fields[2]);
            s.features.resize(set.feature_dim);
            for (int i = 0; i < set.feature_dim; ++i) {
                std::size_t used = 0;
                s.features[i] = std::stod(fields[3 + i], &used);
                if (used != fields[3 + i].size()) {
                    malformed(path, line_no, "trailing junk in feature field");
                }
            }
        } catch (const std::runtime_error&) {
            throw;
        } catch (const std::exception&) {
            malformed(path, line_no, "non-numeric field");
        }
        if (s.age < 1 || s.age > set.bins) {
            malformed(path, line_no, "age " + std::to_string(s.age) + " outside [1, " +
                                         std::to_string(set.bins) + "]");
        }
        set.samples.push_back(std::move(s));
    }
    if (!header_seen) {
        throw std::runtime_error(path + ": missing dataset header");
    }
    return set;
}

}  // namespace agedist
