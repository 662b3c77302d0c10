#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "corn/data.hpp"
#include "corn/labels.hpp"
#include "corn/losses.hpp"
#include "corn/metrics.hpp"
#include "corn/train.hpp"

namespace py = pybind11;

namespace {

using Matrix = py::array_t<double, py::array::c_style | py::array::forcecast>;

struct MatrixView {
    std::vector<double> values;
    std::size_t rows = 0;
    std::size_t cols = 0;
};

MatrixView as_matrix(const Matrix& array, const char* name) {
    if (array.ndim() != 2) {
        throw std::invalid_argument(std::string(name) + " must be a 2-D array");
    }
    MatrixView view;
    view.rows = static_cast<std::size_t>(array.shape(0));
    view.cols = static_cast<std::size_t>(array.shape(1));
    view.values.assign(array.data(), array.data() + view.rows * view.cols);
    return view;
}

py::array_t<double> to_array(const std::vector<double>& values, std::size_t rows,
                             std::size_t cols) {
    py::array_t<double> out({rows, cols});
    std::copy(values.begin(), values.end(), out.mutable_data());
    return out;
}

/// Runs a loss on a 64-bit tape and returns (value, d loss / d logits).
template <typename LossFn>
std::pair<double, py::array_t<double>> loss_with_grad(const MatrixView& logits, LossFn&& fn) {
    corn::Tape<double> tape;
    auto logits_tensor =
        corn::Tensor<double>::from(logits.rows, logits.cols, logits.values, true);
    const auto loss = fn(tape, logits_tensor);
    tape.backward(loss);
    return {loss.item(), to_array(logits_tensor.grad(), logits.rows, logits.cols)};
}

corn::RunConfig make_config(const std::string& method, int num_ranks,
                            const std::vector<std::size_t>& hidden, double lr,
                            std::size_t batch_size, int epochs, std::uint64_t seed,
                            double dropout, double weight_decay, bool balance,
                            std::uint64_t split_seed) {
    corn::RunConfig config;
    config.method = corn::parse_head(method);
    config.num_ranks = num_ranks;
    config.hidden_dims = hidden;
    config.learning_rate = lr;
    config.batch_size = batch_size;
    config.epochs = epochs;
    config.seeds = {seed};
    config.dropout_p = dropout;
    config.weight_decay = weight_decay;
    config.balance = balance;
    config.split_spec.seed = split_seed;
    corn::apply_method_defaults(config);
    return config;
}

py::dict report_to_dict(const corn::TrainReport& report) {
    py::dict out;
    out["method"] = report.method;
    out["seed"] = report.seed;
    out["selected_epoch"] = report.selected_epoch;
    out["test_mae"] = report.test_mae;
    out["test_rmse"] = report.test_rmse;
    py::list train_loss, val_mae, val_rmse;
    for (const auto& epoch : report.epochs) {
        train_loss.append(epoch.train_loss);
        val_mae.append(epoch.val_mae);
        val_rmse.append(epoch.val_rmse);
    }
    out["train_loss"] = train_loss;
    out["val_mae"] = val_mae;
    out["val_rmse"] = val_rmse;
    return out;
}

}  // namespace

PYBIND11_MODULE(_corn, m) {
    m.doc() = "Rank-consistent ordinal regression (conditional task probabilities) with the "
              "coral / ornn / ce reference methods";

    m.def("extend_labels",
          [](const std::vector<int>& ranks, int num_ranks) {
              const auto bits = corn::extend_labels(ranks, num_ranks);
              py::array_t<std::uint8_t> out(
                  {ranks.size(), static_cast<std::size_t>(num_ranks - 1)});
              std::copy(bits.begin(), bits.end(), out.mutable_data());
              return out;
          },
          py::arg("ranks"), py::arg("num_ranks"),
          "Extended binary labels: bit k is 1 iff rank > k+1 (one row per example).");

    m.def("build_subset_masks",
          [](const std::vector<int>& ranks, int num_ranks) {
              const auto masks = corn::build_subset_masks(ranks, num_ranks);
              py::array_t<bool> member({masks.batch, static_cast<std::size_t>(num_ranks - 1)});
              std::copy(masks.member.begin(), masks.member.end(), member.mutable_data());
              py::dict out;
              out["member"] = member;
              out["sizes"] = masks.sizes;
              return out;
          },
          py::arg("ranks"), py::arg("num_ranks"),
          "Conditional training-subset membership per task, plus subset sizes.");

    m.def("corn_loss",
          [](const Matrix& logits, const std::vector<int>& ranks, int num_ranks) {
              const auto view = as_matrix(logits, "logits");
              return loss_with_grad(view, [&](auto& tape, auto& z) {
                         return corn::corn_loss(tape, z, ranks, num_ranks);
                     }).first;
          },
          py::arg("logits"), py::arg("ranks"), py::arg("num_ranks"),
          "Stable conditional-subset loss on (K-1)-column logits.");

    m.def("corn_loss_with_grad",
          [](const Matrix& logits, const std::vector<int>& ranks, int num_ranks) {
              const auto view = as_matrix(logits, "logits");
              return loss_with_grad(view, [&](auto& tape, auto& z) {
                  return corn::corn_loss(tape, z, ranks, num_ranks);
              });
          },
          py::arg("logits"), py::arg("ranks"), py::arg("num_ranks"));

    m.def("corn_loss_reference",
          [](const Matrix& probabilities, const std::vector<int>& ranks, int num_ranks) {
              const auto view = as_matrix(probabilities, "probabilities");
              return corn::corn_loss_reference(view.values, ranks, num_ranks);
          },
          py::arg("probabilities"), py::arg("ranks"), py::arg("num_ranks"),
          "Naive probability-form loss (test oracle).");

    m.def("ornn_loss",
          [](const Matrix& logits, const std::vector<int>& ranks, int num_ranks) {
              const auto view = as_matrix(logits, "logits");
              return loss_with_grad(view, [&](auto& tape, auto& z) {
                         return corn::ornn_loss(tape, z, ranks, num_ranks);
                     }).first;
          },
          py::arg("logits"), py::arg("ranks"), py::arg("num_ranks"));

    m.def("coral_loss",
          [](const Matrix& shared_logit, const Matrix& biases, const std::vector<int>& ranks,
             int num_ranks) {
              const auto shared = as_matrix(shared_logit, "shared_logit");
              const auto bias = as_matrix(biases, "biases");
              corn::Tape<double> tape;
              auto shared_tensor =
                  corn::Tensor<double>::from(shared.rows, shared.cols, shared.values, true);
              auto bias_tensor = corn::Tensor<double>::from(bias.rows, bias.cols, bias.values);
              return corn::coral_loss(tape, shared_tensor, bias_tensor, ranks, num_ranks).item();
          },
          py::arg("shared_logit"), py::arg("biases"), py::arg("ranks"), py::arg("num_ranks"),
          "Weight-sharing head loss from the shared logit column and the 1x(K-1) bias row.");

    m.def("ce_loss",
          [](const Matrix& logits, const std::vector<int>& ranks, int num_ranks) {
              const auto view = as_matrix(logits, "logits");
              return loss_with_grad(view, [&](auto& tape, auto& z) {
                         return corn::ce_loss(tape, z, ranks, num_ranks);
                     }).first;
          },
          py::arg("logits"), py::arg("ranks"), py::arg("num_ranks"));

    m.def("chain_rule_probs",
          [](const Matrix& conditional) {
              const auto view = as_matrix(conditional, "conditional");
              const auto unconditional = corn::chain_rule_probs(
                  view.values, view.rows, static_cast<int>(view.cols) + 1);
              return to_array(unconditional, view.rows, view.cols);
          },
          py::arg("conditional"),
          "Row-wise cumulative product of conditional task probabilities.");

    m.def("decode_rank",
          [](const Matrix& unconditional) {
              const auto view = as_matrix(unconditional, "unconditional");
              return corn::decode_rank(view.values, view.rows, static_cast<int>(view.cols) + 1);
          },
          py::arg("unconditional"),
          "q = 1 + #(P > 0.5) per row, strict threshold.");

    m.def("decode_rank_ce",
          [](const Matrix& logits) {
              const auto view = as_matrix(logits, "logits");
              return corn::decode_rank_ce(view.values, view.rows, static_cast<int>(view.cols));
          },
          py::arg("logits"), "Argmax + 1 per row; ties break toward the lower rank.");

    m.def("predict_ranks",
          [](const std::string& method, const Matrix& logits) {
              const auto view = as_matrix(logits, "logits");
              const corn::HeadKind kind = corn::parse_head(method);
              const int num_ranks = kind == corn::HeadKind::CrossEntropy
                                        ? static_cast<int>(view.cols)
                                        : static_cast<int>(view.cols) + 1;
              return corn::predict_ranks(kind, view.values, view.rows, num_ranks);
          },
          py::arg("method"), py::arg("logits"),
          "Head-aware rank decoding from raw output-layer logits.");

    m.def("mae", &corn::mae, py::arg("truth"), py::arg("predicted"));
    m.def("rmse", &corn::rmse, py::arg("truth"), py::arg("predicted"));

    m.def("synth_ordinal",
          [](std::size_t n, std::size_t d, int num_ranks, double noise, std::uint64_t seed) {
              const corn::Dataset dataset = corn::synth_ordinal(n, d, num_ranks, noise, seed);
              return py::make_tuple(to_array(dataset.features, dataset.size(), d),
                                    dataset.labels);
          },
          py::arg("n"), py::arg("d"), py::arg("num_ranks"), py::arg("noise") = 0.1,
          py::arg("seed") = 0,
          "Synthetic ordinal dataset: (features, labels) with a monotone latent ground truth.");

    m.def("fit",
          [](const Matrix& features, const std::vector<int>& labels, int num_ranks,
             const std::string& method, const std::vector<std::size_t>& hidden, double lr,
             std::size_t batch_size, int epochs, std::uint64_t seed, double dropout,
             double weight_decay, bool balance, std::uint64_t split_seed) {
              const auto view = as_matrix(features, "features");
              if (labels.size() != view.rows) {
                  throw std::invalid_argument("features and labels disagree on the row count");
              }
              corn::Dataset dataset;
              dataset.num_features = view.cols;
              dataset.num_ranks = num_ranks;
              dataset.features = view.values;
              dataset.labels = labels;
              for (std::size_t c = 0; c < view.cols; ++c) {
                  dataset.feature_names.push_back("f" + std::to_string(c));
              }
              dataset.source_rows.resize(view.rows);
              for (std::size_t i = 0; i < view.rows; ++i) dataset.source_rows[i] = i;
              corn::validate_ranks(labels, num_ranks);

              const corn::RunConfig config =
                  make_config(method, num_ranks, hidden, lr, batch_size, epochs, seed, dropout,
                              weight_decay, balance, split_seed);
              const corn::RunArtifacts artifacts = corn::run_train(dataset, config, nullptr);
              return report_to_dict(artifacts.summary.reports.front());
          },
          py::arg("features"), py::arg("labels"), py::arg("num_ranks"),
          py::arg("method") = "corn", py::arg("hidden") = std::vector<std::size_t>{},
          py::arg("lr") = 0.0, py::arg("batch_size") = std::size_t{0}, py::arg("epochs") = 50,
          py::arg("seed") = std::uint64_t{0}, py::arg("dropout") = 0.2,
          py::arg("weight_decay") = 0.2, py::arg("balance") = false,
          py::arg("split_seed") = std::uint64_t{0},
          "Split/standardize/train on in-memory data; returns the per-epoch curve and test "
          "metrics of the selected model.");

#ifdef VERSION_INFO
    m.attr("__version__") = VERSION_INFO;
#else
    m.attr("__version__") = "dev";
#endif
}
