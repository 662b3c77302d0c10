#include "corn/data.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "corn/labels.hpp"

namespace corn {

namespace {

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    std::stringstream ss(line);
    while (std::getline(ss, field, ',')) {
        // trim surrounding whitespace
        const auto begin = field.find_first_not_of(" \t\r");
        const auto end = field.find_last_not_of(" \t\r");
        fields.push_back(begin == std::string::npos ? std::string()
                                                    : field.substr(begin, end - begin + 1));
    }
    if (!line.empty() && line.back() == ',') fields.emplace_back();
    return fields;
}

bool parse_number(const std::string& field, double& out) {
    if (field.empty()) return false;
    std::size_t consumed = 0;
    try {
        out = std::stod(field, &consumed);
    } catch (const std::exception&) {
        return false;
    }
    return consumed == field.size();
}

Dataset take_rows(const Dataset& dataset, const std::vector<std::size_t>& positions) {
    Dataset out;
    out.num_features = dataset.num_features;
    out.num_ranks = dataset.num_ranks;
    out.feature_names = dataset.feature_names;
    out.mean = dataset.mean;
    out.stddev = dataset.stddev;
    out.features.reserve(positions.size() * dataset.num_features);
    out.labels.reserve(positions.size());
    out.source_rows.reserve(positions.size());
    for (const std::size_t p : positions) {
        const double* r = dataset.row(p);
        out.features.insert(out.features.end(), r, r + dataset.num_features);
        out.labels.push_back(dataset.labels[p]);
        out.source_rows.push_back(dataset.source_rows[p]);
    }
    return out;
}

}  // namespace

std::vector<std::size_t> Dataset::label_histogram() const {
    std::vector<std::size_t> counts(static_cast<std::size_t>(num_ranks), 0);
    for (const int label : labels) {
        ++counts[static_cast<std::size_t>(label - 1)];
    }
    return counts;
}

Dataset load_csv(const std::string& path, int num_ranks) {
    if (num_ranks < 2) {
        throw std::invalid_argument("load_csv: need K >= 2 ranks");
    }
    std::ifstream file(path);
    if (!file) {
        throw std::runtime_error("could not open dataset file " + path);
    }

    Dataset dataset;
    dataset.num_ranks = num_ranks;
    std::vector<double> raw_labels;
    std::string line;
    std::size_t line_number = 0;
    std::size_t data_row = 0;
    bool header_checked = false;

    while (std::getline(file, line)) {
        ++line_number;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        const auto fields = split_fields(line);
        if (!header_checked) {
            header_checked = true;
            bool all_numeric = true;
            double ignored;
            for (const auto& f : fields) {
                if (!parse_number(f, ignored)) {
                    all_numeric = false;
                    break;
                }
            }
            if (!all_numeric) {
                dataset.feature_names.assign(fields.begin(), fields.end() - 1);
                continue;  // header row
            }
        }
        if (fields.size() < 2) {
            throw std::runtime_error(path + ":" + std::to_string(line_number) +
                                     ": expected at least one feature and a label");
        }
        if (dataset.num_features == 0) {
            dataset.num_features = fields.size() - 1;
            if (dataset.feature_names.empty()) {
                for (std::size_t i = 0; i < dataset.num_features; ++i) {
                    dataset.feature_names.push_back("f" + std::to_string(i));
                }
            } else if (dataset.feature_names.size() != dataset.num_features) {
                throw std::runtime_error(path + ": header has " +
                                         std::to_string(dataset.feature_names.size()) +
                                         " feature names for " +
                                         std::to_string(dataset.num_features) + " columns");
            }
        } else if (fields.size() != dataset.num_features + 1) {
            throw std::runtime_error(path + ":" + std::to_string(line_number) + ": expected " +
                                     std::to_string(dataset.num_features + 1) + " fields, got " +
                                     std::to_string(fields.size()));
        }
        for (std::size_t i = 0; i < dataset.num_features; ++i) {
            double value;
            if (!parse_number(fields[i], value)) {
                throw std::runtime_error(path + ":" + std::to_string(line_number) +
                                         ": malformed numeric field '" + fields[i] + "'");
            }
            dataset.features.push_back(value);
        }
        double label;
        if (!parse_number(fields.back(), label)) {
            throw std::runtime_error(path + ":" + std::to_string(line_number) +
                                     ": malformed label '" + fields.back() + "'");
        }
        raw_labels.push_back(label);
        dataset.source_rows.push_back(data_row++);
    }

    if (raw_labels.empty()) {
        throw std::runtime_error(path + ": no data rows");
    }

    // Either the labels are already integer ranks in {1..K}, or the sorted
    // distinct category values are remapped to contiguous ranks 1..K.
    bool direct = true;
    for (const double raw : raw_labels) {
        if (raw != std::floor(raw) || raw < 1.0 || raw > static_cast<double>(num_ranks)) {
            direct = false;
            break;
        }
    }
    if (direct) {
        for (const double raw : raw_labels) {
            dataset.labels.push_back(static_cast<int>(raw));
        }
    } else {
        std::map<double, int> rank_of;
        for (const double raw : raw_labels) rank_of[raw] = 0;
        if (rank_of.size() != static_cast<std::size_t>(num_ranks)) {
            throw std::runtime_error(path + ": found " + std::to_string(rank_of.size()) +
                                     " distinct label values, expected K=" +
                                     std::to_string(num_ranks));
        }
        int next = 1;
        for (auto& [value, rank] : rank_of) rank = next++;
        for (const double raw : raw_labels) dataset.labels.push_back(rank_of.at(raw));
    }
    return dataset;
}

Dataset balance_classes(const Dataset& dataset, Rng& rng) {
    const auto histogram = dataset.label_histogram();
    std::size_t smallest = dataset.size();
    for (int k = 0; k < dataset.num_ranks; ++k) {
        if (histogram[static_cast<std::size_t>(k)] == 0) {
            throw std::runtime_error("balance_classes: class " + std::to_string(k + 1) +
                                     " has no examples");
        }
        smallest = std::min(smallest, histogram[static_cast<std::size_t>(k)]);
    }

    std::vector<std::size_t> keep;
    keep.reserve(smallest * static_cast<std::size_t>(dataset.num_ranks));
    for (int k = 1; k <= dataset.num_ranks; ++k) {
        std::vector<std::size_t> members;
        for (std::size_t i = 0; i < dataset.size(); ++i) {
            if (dataset.labels[i] == k) members.push_back(i);
        }
        rng.shuffle(members);
        members.resize(smallest);
        keep.insert(keep.end(), members.begin(), members.end());
    }
    std::sort(keep.begin(), keep.end());
    return take_rows(dataset, keep);
}

Splits split(const Dataset& dataset, const SplitSpec& spec) {
    const double fraction_sum = spec.train_fraction + spec.val_fraction + spec.test_fraction;
    if (std::abs(fraction_sum - 1.0) > 1e-9) {
        throw std::invalid_argument("split fractions must sum to 1");
    }
    const std::size_t n = dataset.size();
    if (n < 20) {
        throw std::invalid_argument("split: need at least 20 examples, got " + std::to_string(n));
    }

    // Largest-remainder rounding of the three part sizes.
    const double want[3] = {spec.train_fraction * static_cast<double>(n),
                            spec.val_fraction * static_cast<double>(n),
                            spec.test_fraction * static_cast<double>(n)};
    std::size_t sizes[3];
    double remainders[3];
    std::size_t assigned = 0;
    for (int i = 0; i < 3; ++i) {
        sizes[i] = static_cast<std::size_t>(std::floor(want[i]));
        remainders[i] = want[i] - std::floor(want[i]);
        assigned += sizes[i];
    }
    std::array<int, 3> order = {0, 1, 2};
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return remainders[a] > remainders[b]; });
    for (std::size_t leftover = n - assigned, i = 0; leftover > 0; --leftover, ++i) {
        ++sizes[static_cast<std::size_t>(order[i % 3])];
    }

    std::vector<std::size_t> positions(n);
    std::iota(positions.begin(), positions.end(), std::size_t{0});
    Rng rng(spec.seed);
    rng.shuffle(positions);

    Splits out;
    std::size_t offset = 0;
    Dataset* parts[3] = {&out.train, &out.val, &out.test};
    for (int i = 0; i < 3; ++i) {
        std::vector<std::size_t> chunk(positions.begin() + static_cast<std::ptrdiff_t>(offset),
                                       positions.begin() +
                                           static_cast<std::ptrdiff_t>(offset + sizes[i]));
        *parts[i] = take_rows(dataset, chunk);
        offset += sizes[i];
    }
    return out;
}

void apply_standardization(Dataset& dataset, const std::vector<double>& mean,
                           const std::vector<double>& stddev) {
    if (mean.size() != dataset.num_features || stddev.size() != dataset.num_features) {
        throw std::invalid_argument("standardization statistics have wrong width");
    }
    for (std::size_t i = 0; i < dataset.size(); ++i) {
        for (std::size_t c = 0; c < dataset.num_features; ++c) {
            double& x = dataset.features[i * dataset.num_features + c];
            x = (x - mean[c]) / stddev[c];
        }
    }
    dataset.mean = mean;
    dataset.stddev = stddev;
}

void standardize(Dataset& train, const std::vector<Dataset*>& others) {
    if (train.size() == 0) {
        throw std::invalid_argument("standardize: empty training set");
    }
    const std::size_t d = train.num_features;
    std::vector<double> mean(d, 0.0), stddev(d, 0.0);
    for (std::size_t i = 0; i < train.size(); ++i) {
        for (std::size_t c = 0; c < d; ++c) mean[c] += train.features[i * d + c];
    }
    for (std::size_t c = 0; c < d; ++c) mean[c] /= static_cast<double>(train.size());
    for (std::size_t i = 0; i < train.size(); ++i) {
        for (std::size_t c = 0; c < d; ++c) {
            const double delta = train.features[i * d + c] - mean[c];
            stddev[c] += delta * delta;
        }
    }
    for (std::size_t c = 0; c < d; ++c) {
        stddev[c] = std::sqrt(stddev[c] / static_cast<double>(train.size()));
        if (stddev[c] < 1e-12) stddev[c] = 1.0;  // constant column: center only
    }
    apply_standardization(train, mean, stddev);
    for (Dataset* other : others) {
        apply_standardization(*other, mean, stddev);
    }
}

Dataset synth_ordinal(std::size_t n, std::size_t d, int num_ranks, double noise,
                      std::uint64_t seed) {
    if (num_ranks < 2) throw std::invalid_argument("synth_ordinal: need K >= 2");
    if (n < static_cast<std::size_t>(num_ranks)) {
        throw std::invalid_argument("synth_ordinal: need n >= K");
    }
    if (d == 0) throw std::invalid_argument("synth_ordinal: need d >= 1");

    Rng rng(seed);
    std::vector<double> weights(d);
    double norm = 0.0;
    for (double& w : weights) {
        w = rng.gaussian();
        norm += w * w;
    }
    norm = std::sqrt(norm);
    for (double& w : weights) w /= norm;

    Dataset dataset;
    dataset.num_features = d;
    dataset.num_ranks = num_ranks;
    for (std::size_t i = 0; i < d; ++i) dataset.feature_names.push_back("f" + std::to_string(i));
    dataset.features.resize(n * d);
    dataset.labels.resize(n);
    dataset.source_rows.resize(n);

    // score ~ N(0, 1 + noise^2); its probit transform is uniform on (0,1), so
    // the K equally sized cells give a uniform class histogram in expectation.
    const double score_scale = std::sqrt(1.0 + noise * noise);
    for (std::size_t i = 0; i < n; ++i) {
        double score = 0.0;
        for (std::size_t c = 0; c < d; ++c) {
            const double x = rng.gaussian();
            dataset.features[i * d + c] = x;
            score += weights[c] * x;
        }
        score += noise * rng.gaussian();
        const double u = 0.5 * std::erfc(-score / (score_scale * std::sqrt(2.0)));
        int label = 1 + static_cast<int>(u * static_cast<double>(num_ranks));
        dataset.labels[i] = std::clamp(label, 1, num_ranks);
        dataset.source_rows[i] = i;
    }
    return dataset;
}

Dataset select_by_source_rows(const Dataset& dataset, const std::vector<std::size_t>& wanted) {
    std::vector<std::size_t> positions;
    positions.reserve(wanted.size());
    std::map<std::size_t, std::size_t> position_of;
    for (std::size_t i = 0; i < dataset.size(); ++i) position_of[dataset.source_rows[i]] = i;
    for (const std::size_t source : wanted) {
        const auto it = position_of.find(source);
        if (it == position_of.end()) {
            throw std::runtime_error("manifest row " + std::to_string(source) +
                                     " not present in dataset");
        }
        positions.push_back(it->second);
    }
    return take_rows(dataset, positions);
}

void write_csv(const Dataset& dataset, const std::string& path) {
    std::ofstream file(path);
    if (!file) throw std::runtime_error("could not write " + path);
    for (std::size_t c = 0; c < dataset.num_features; ++c) {
        file << dataset.feature_names[c] << ',';
    }
    file << "label\n";
    file.precision(17);
    for (std::size_t i = 0; i < dataset.size(); ++i) {
        for (std::size_t c = 0; c < dataset.num_features; ++c) {
            file << dataset.features[i * dataset.num_features + c] << ',';
        }
        file << dataset.labels[i] << '\n';
    }
}

void write_index_manifest(const std::vector<std::size_t>& rows, const std::string& path) {
    std::ofstream file(path);
    if (!file) throw std::runtime_error("could not write " + path);
    for (const std::size_t r : rows) file << r << '\n';
}

std::vector<std::size_t> read_index_manifest(const std::string& path) {
    std::ifstream file(path);
    if (!file) throw std::runtime_error("could not open manifest " + path);
    std::vector<std::size_t> rows;
    std::string line;
    while (std::getline(file, line)) {
        if (line.empty()) continue;
        rows.push_back(static_cast<std::size_t>(std::stoull(line)));
    }
    return rows;
}

}  // namespace corn
