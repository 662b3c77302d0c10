#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "corn/rng.hpp"

namespace corn {

/// Tabular dataset: N x d features (row-major, 64-bit) with 1-based integer
/// rank labels. source_rows tracks each example's 0-based data-row number in
/// the originally ingested file, so split manifests stay meaningful after
/// balancing and splitting. mean/stddev hold the standardization statistics
/// once standardize() has run (training statistics, also on val/test).
struct Dataset {
    std::size_t num_features = 0;
    int num_ranks = 0;
    std::vector<double> features;      // row-major, size() * num_features
    std::vector<int> labels;           // 1..num_ranks
    std::vector<std::string> feature_names;
    std::vector<std::size_t> source_rows;
    std::vector<double> mean;          // per column; empty until standardized
    std::vector<double> stddev;

    std::size_t size() const { return labels.size(); }
    const double* row(std::size_t i) const { return features.data() + i * num_features; }
    std::vector<std::size_t> label_histogram() const;
};

/// Reads comma-separated rows of d numeric features followed by one integer
/// label column. A single header row is auto-detected (any non-numeric
/// field). Labels may either already be integers in {1..K}, or an arbitrary
/// numeric category set whose sorted distinct values are remapped to 1..K.
/// Malformed rows and out-of-range labels raise errors naming the line.
Dataset load_csv(const std::string& path, int num_ranks);

/// Uniform subsample without replacement down to the smallest class count;
/// row order of the survivors is preserved. Errors if any class is empty.
Dataset balance_classes(const Dataset& dataset, Rng& rng);

struct SplitSpec {
    double train_fraction = 0.75;
    double val_fraction = 0.05;
    double test_fraction = 0.20;
    std::uint64_t seed = 0;
};

struct Splits {
    Dataset train;
    Dataset val;
    Dataset test;
};

/// Disjoint, exhaustive shuffled partition with largest-remainder rounding of
/// the fraction sizes. Deterministic in the split seed.
Splits split(const Dataset& dataset, const SplitSpec& spec);

/// Per-column (x - mean)/stddev using *training* statistics on every split;
/// zero-variance columns are centered and passed through. Stores the
/// statistics on each dataset.
void standardize(Dataset& train, const std::vector<Dataset*>& others);

/// Applies previously computed statistics (e.g. from a checkpoint).
void apply_standardization(Dataset& dataset, const std::vector<double>& mean,
                           const std::vector<double>& stddev);

/// Synthetic ordinal data: Gaussian features, latent score w.x + noise*eps,
/// probit-mapped to (0,1) and cut at K-1 equally spaced thresholds, so the
/// label is a monotone function of the latent score and the class histogram
/// is asymptotically uniform.
Dataset synth_ordinal(std::size_t n, std::size_t d, int num_ranks, double noise,
                      std::uint64_t seed);

/// Keeps the rows whose source_rows appear in `wanted` (file order preserved).
Dataset select_by_source_rows(const Dataset& dataset, const std::vector<std::size_t>& wanted);

void write_csv(const Dataset& dataset, const std::string& path);

/// Split manifests: one source row index per line.
void write_index_manifest(const std::vector<std::size_t>& rows, const std::string& path);
std::vector<std::size_t> read_index_manifest(const std::string& path);

}  // namespace corn
