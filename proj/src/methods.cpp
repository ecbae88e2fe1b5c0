#include "dpart/methods.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

#include "dpart/error.hpp"

namespace dpart {

const char* to_string(MethodKind kind) {
  switch (kind) {
    case MethodKind::HistogramSampler: return "histogram_sampler";
    case MethodKind::ConditionalDistribution: return "conditional_distribution";
    case MethodKind::LinearRegression: return "linear_regression";
    case MethodKind::LogisticRegression: return "logistic_regression";
  }
  return "?";
}

MethodKind method_kind_from_string(const std::string& s) {
  if (s == "histogram_sampler") return MethodKind::HistogramSampler;
  if (s == "conditional_distribution") return MethodKind::ConditionalDistribution;
  if (s == "linear_regression") return MethodKind::LinearRegression;
  if (s == "logistic_regression") return MethodKind::LogisticRegression;
  throw_invalid("unknown method '" + s +
                "' (expected histogram_sampler, conditional_distribution, "
                "linear_regression, or logistic_regression)");
}

bool method_supports(MethodKind kind, ColumnType target_type) {
  switch (kind) {
    case MethodKind::LinearRegression: return is_numerical(target_type);
    case MethodKind::LogisticRegression: return is_categorical(target_type);
    default: return true;
  }
}

std::vector<GenValue> column_to_gen_values(const Table& table, const Bounds& bounds,
                                           std::size_t column) {
  std::vector<GenValue> out;
  out.reserve(table.row_count());
  if (is_numerical(table.schema.columns[column].type)) {
    for (double v : table.numerical(column)) out.emplace_back(v);
  } else {
    const auto& cb = bounds.categorical(column);
    for (const auto& v : table.categorical(column)) {
      int idx = cb.index_of(v);
      if (idx < 0) {
        throw_invalid("value '" + v + "' in column '" +
                      table.schema.columns[column].name +
                      "' is not in the category list");
      }
      out.emplace_back(static_cast<std::int32_t>(idx));
    }
  }
  return out;
}

namespace {

// --- shared helpers --------------------------------------------------------

struct ColumnRef {
  std::size_t index;
  ColumnType type;
};

ColumnRef resolve_column(const Schema& schema, const std::string& name) {
  int idx = schema.require(name);
  return {static_cast<std::size_t>(idx), schema.columns[static_cast<std::size_t>(idx)].type};
}

std::int32_t numeric_bin(double v, const NumericalBounds& b, int n_bins) {
  double width = (b.max - b.min) / n_bins;
  auto bin = static_cast<std::int32_t>(std::floor((v - b.min) / width));
  return std::clamp(bin, 0, n_bins - 1);
}

// Maps a generation-space parent value onto its bin id.
struct ParentBinner {
  bool categorical = false;
  std::int32_t n_bins = 0;
  NumericalBounds num_bounds;

  std::int32_t bin_of(const GenValue& v) const {
    if (categorical) {
      auto idx = std::get<std::int32_t>(v);
      if (idx < 0 || idx >= n_bins) throw_invalid("parent category index out of range");
      return idx;
    }
    return numeric_bin(std::get<double>(v), num_bounds, n_bins);
  }
};

ParentBinner make_parent_binner(ColumnType type, const ColumnBounds& bounds, int n_bins) {
  ParentBinner pb;
  if (is_categorical(type)) {
    pb.categorical = true;
    pb.n_bins = static_cast<std::int32_t>(
        std::get<CategoricalBounds>(bounds).categories.size());
  } else {
    pb.categorical = false;
    pb.num_bounds = std::get<NumericalBounds>(bounds);
    pb.n_bins = n_bins;
  }
  return pb;
}

// Min-max rescaled numericals plus one-hot categoricals, driven purely by
// the declared bounds so feature ranges never depend on the data.
class FeatureEncoder {
 public:
  FeatureEncoder(const Schema& schema, const Bounds& bounds,
                 const std::vector<std::string>& parent_names) {
    for (const auto& name : parent_names) {
      auto ref = resolve_column(schema, name);
      Part part;
      if (is_categorical(ref.type)) {
        part.categorical = true;
        part.cats = static_cast<int>(bounds.categorical(ref.index).categories.size());
      } else {
        const auto& nb = bounds.numerical(ref.index);
        part.categorical = false;
        part.min = nb.min;
        part.range = nb.max - nb.min;
      }
      dim_ += part.categorical ? part.cats : 1;
      parts_.push_back(part);
    }
  }

  int dim() const { return dim_; }

  void encode(std::span<const GenValue> parents, double* out) const {
    std::size_t o = 0;
    for (std::size_t i = 0; i < parts_.size(); ++i) {
      const Part& part = parts_[i];
      if (part.categorical) {
        for (int c = 0; c < part.cats; ++c) out[o + static_cast<std::size_t>(c)] = 0.0;
        auto idx = std::get<std::int32_t>(parents[i]);
        if (idx < 0 || idx >= part.cats) throw_invalid("parent category index out of range");
        out[o + static_cast<std::size_t>(idx)] = 1.0;
        o += static_cast<std::size_t>(part.cats);
      } else {
        double v = std::get<double>(parents[i]);
        out[o++] = std::clamp((v - part.min) / part.range, 0.0, 1.0);
      }
    }
  }

 private:
  struct Part {
    bool categorical = false;
    int cats = 0;
    double min = 0.0;
    double range = 1.0;
  };

  std::vector<Part> parts_;
  int dim_ = 0;
};

std::vector<std::vector<GenValue>> parent_rows(const Table& table, const Bounds& bounds,
                                               const std::vector<std::string>& parent_names) {
  std::vector<std::vector<GenValue>> cols;
  for (const auto& name : parent_names) {
    auto ref = resolve_column(table.schema, name);
    cols.push_back(column_to_gen_values(table, bounds, ref.index));
  }
  std::vector<std::vector<GenValue>> rows(table.row_count());
  for (std::size_t r = 0; r < table.row_count(); ++r) {
    rows[r].reserve(cols.size());
    for (const auto& col : cols) rows[r].push_back(col[r]);
  }
  return rows;
}

// --- conditional distribution (and histogram sampler) ----------------------

class ConditionalDistributionMethod final : public FittedMethod {
 public:
  ConditionalDistributionMethod(MethodKind kind, std::string target,
                                std::vector<std::string> parents)
      : kind_(kind), target_(std::move(target)), parents_(std::move(parents)) {}

  MethodKind kind() const override { return kind_; }
  const std::vector<std::string>& parent_names() const override { return parents_; }
  const std::string& target_name() const override { return target_; }

  GenValue sample(std::span<const GenValue> parents, Rng& rng) const override {
    std::size_t slice = 0;
    for (std::size_t i = 0; i < binners_.size(); ++i) {
      slice = slice * static_cast<std::size_t>(binners_[i].n_bins) +
              static_cast<std::size_t>(binners_[i].bin_of(parents[i]));
    }
    const double* cdf = slice_cdf_.data() + slice * static_cast<std::size_t>(target_bins_);
    double u = rng.uniform01() * cdf[target_bins_ - 1];
    auto bin = static_cast<std::int32_t>(
        std::lower_bound(cdf, cdf + target_bins_, u) - cdf);
    bin = std::min(bin, target_bins_ - 1);
    if (target_categorical_) return bin;
    return undiscretize_numerical(bin, target_edges_, target_type_, rng);
  }

  nlohmann::json to_json() const override {
    return {{"kind", to_string(kind_)},
            {"target", target_},
            {"parents", parents_},
            {"probs", probs_}};
  }

  const std::vector<double>& probabilities() const { return probs_; }

  static std::unique_ptr<ConditionalDistributionMethod> create(
      MethodKind kind, const Schema& schema, const Bounds& bounds,
      const std::vector<std::string>& parent_names, const std::string& target,
      const MethodConfig& config) {
    auto m = std::make_unique<ConditionalDistributionMethod>(kind, target, parent_names);
    auto ref = resolve_column(schema, target);
    m->target_type_ = ref.type;
    m->target_categorical_ = is_categorical(ref.type);
    if (m->target_categorical_) {
      m->target_bins_ = static_cast<std::int32_t>(
          bounds.categorical(ref.index).categories.size());
    } else {
      m->target_bins_ = config.n_bins;
      m->target_edges_ = uniform_edges(bounds.numerical(ref.index), config.n_bins);
    }

    std::size_t cells = static_cast<std::size_t>(m->target_bins_);
    for (const auto& pname : parent_names) {
      auto pref = resolve_column(schema, pname);
      auto binner = make_parent_binner(pref.type, bounds.columns[pref.index], config.n_bins);
      if (cells > config.max_joint_cells / static_cast<std::size_t>(binner.n_bins)) {
        throw_invalid("joint histogram for column '" + target + "' exceeds " +
                      std::to_string(config.max_joint_cells) +
                      " cells; use fewer parents or fewer bins");
      }
      cells *= static_cast<std::size_t>(binner.n_bins);
      m->binners_.push_back(binner);
    }
    m->probs_.assign(cells, 0.0);
    return m;
  }

  void fit(const Table& table, const Bounds& bounds, std::optional<double> epsilon,
           Rng& rng) {
    auto ref = resolve_column(table.schema, target_);
    DiscretizedColumn target_disc =
        discretize(table.columns[ref.index], ref.type, bounds.columns[ref.index],
                   target_categorical_ ? 1 : target_bins_, target_);

    std::vector<std::vector<std::int32_t>> parent_bins;
    for (const auto& pname : parents_) {
      auto pref = resolve_column(table.schema, pname);
      parent_bins.push_back(
          discretize(table.columns[pref.index], table.schema.columns[pref.index].type,
                     bounds.columns[pref.index],
                     binners_[parent_bins.size()].categorical
                         ? 1
                         : binners_[parent_bins.size()].n_bins,
                     pname)
              .bin_ids);
    }

    for (std::size_t r = 0; r < table.row_count(); ++r) {
      std::size_t slice = 0;
      for (std::size_t i = 0; i < binners_.size(); ++i) {
        slice = slice * static_cast<std::size_t>(binners_[i].n_bins) +
                static_cast<std::size_t>(parent_bins[i][r]);
      }
      probs_[slice * static_cast<std::size_t>(target_bins_) +
             static_cast<std::size_t>(target_disc.bin_ids[r])] += 1.0;
    }

    // One Laplace query over the whole joint histogram (L1 sensitivity 1).
    if (epsilon.has_value()) {
      for (auto& c : probs_) c = laplace_noise(c, 1.0, epsilon, rng);
    }
    normalize_slices();
    build_cdf();
  }

  void load_probs(std::vector<double> probs) {
    if (probs.size() != probs_.size()) {
      throw_format("conditional distribution for '" + target_ +
                   "' has the wrong table size");
    }
    probs_ = std::move(probs);
    build_cdf();
  }

 private:
  void normalize_slices() {
    std::size_t slices = probs_.size() / static_cast<std::size_t>(target_bins_);
    for (std::size_t s = 0; s < slices; ++s) {
      double* p = probs_.data() + s * static_cast<std::size_t>(target_bins_);
      double total = 0.0;
      for (std::int32_t b = 0; b < target_bins_; ++b) {
        if (p[b] < 0.0) p[b] = 0.0;
        total += p[b];
      }
      if (total <= 0.0) {
        // Nothing observed (or everything noised away): uniform fallback.
        for (std::int32_t b = 0; b < target_bins_; ++b) {
          p[b] = 1.0 / static_cast<double>(target_bins_);
        }
      } else {
        for (std::int32_t b = 0; b < target_bins_; ++b) p[b] /= total;
      }
    }
  }

  void build_cdf() {
    slice_cdf_.resize(probs_.size());
    std::size_t slices = probs_.size() / static_cast<std::size_t>(target_bins_);
    for (std::size_t s = 0; s < slices; ++s) {
      const double* p = probs_.data() + s * static_cast<std::size_t>(target_bins_);
      double* c = slice_cdf_.data() + s * static_cast<std::size_t>(target_bins_);
      double acc = 0.0;
      for (std::int32_t b = 0; b < target_bins_; ++b) {
        acc += p[b];
        c[b] = acc;
      }
    }
  }

  MethodKind kind_;
  std::string target_;
  std::vector<std::string> parents_;
  ColumnType target_type_ = ColumnType::Category;
  bool target_categorical_ = true;
  std::int32_t target_bins_ = 0;
  std::vector<double> target_edges_;
  std::vector<ParentBinner> binners_;
  std::vector<double> probs_;      // slice-major, each slice a distribution
  std::vector<double> slice_cdf_;  // rebuilt after fit/load, not serialized
};

// --- linear regression ------------------------------------------------------

class LinearRegressionMethod final : public FittedMethod {
 public:
  LinearRegressionMethod(std::string target, std::vector<std::string> parents,
                         FeatureEncoder encoder)
      : target_(std::move(target)),
        parents_(std::move(parents)),
        encoder_(std::move(encoder)) {}

  MethodKind kind() const override { return MethodKind::LinearRegression; }
  const std::vector<std::string>& parent_names() const override { return parents_; }
  const std::string& target_name() const override { return target_; }

  GenValue sample(std::span<const GenValue> parents, Rng& rng) const override {
    std::vector<double> phi(static_cast<std::size_t>(encoder_.dim()) + 1, 1.0);
    encoder_.encode(parents, phi.data());
    double pred = 0.0;
    for (std::size_t i = 0; i < phi.size(); ++i) pred += phi[i] * weights_[i];
    if (residual_std_ > 0.0) pred += rng.gaussian() * residual_std_;
    double raw = target_bounds_.min + pred * (target_bounds_.max - target_bounds_.min);
    return to_declared_numeric(raw, target_type_, target_bounds_);
  }

  nlohmann::json to_json() const override {
    return {{"kind", to_string(MethodKind::LinearRegression)},
            {"target", target_},
            {"parents", parents_},
            {"weights", weights_},
            {"residual_std", residual_std_}};
  }

  void fit(const Table& table, const Bounds& bounds, std::optional<double> epsilon,
           const MethodConfig& config, Rng& rng) {
    auto ref = resolve_column(table.schema, target_);
    target_type_ = ref.type;
    target_bounds_ = bounds.numerical(ref.index);

    const std::size_t n = table.row_count();
    const int p = encoder_.dim() + 1;  // + intercept
    if (epsilon.has_value() && n < 10) {
      throw_invalid("DP linear regression for column '" + target_ +
                    "' needs at least 10 rows");
    }
    if (n <= static_cast<std::size_t>(p)) {
      throw_invalid("linear regression for column '" + target_ +
                    "' needs more rows than features");
    }

    auto rows = parent_rows(table, bounds, parents_);
    Eigen::MatrixXd phi(n, p);
    for (std::size_t r = 0; r < n; ++r) {
      std::vector<double> enc(static_cast<std::size_t>(encoder_.dim()));
      encoder_.encode(rows[r], enc.data());
      for (int j = 0; j < p - 1; ++j) phi(static_cast<Eigen::Index>(r), j) = enc[static_cast<std::size_t>(j)];
      phi(static_cast<Eigen::Index>(r), p - 1) = 1.0;
    }
    const double range = target_bounds_.max - target_bounds_.min;
    Eigen::VectorXd y(n);
    {
      const auto& col = table.numerical(ref.index);
      for (std::size_t r = 0; r < n; ++r) {
        y(static_cast<Eigen::Index>(r)) = (col[r] - target_bounds_.min) / range;
      }
    }

    Eigen::MatrixXd gram = phi.transpose() * phi;
    Eigen::VectorXd moments = phi.transpose() * y;

    std::optional<double> eps_coef, eps_res;
    if (epsilon.has_value()) {
      eps_coef = 0.8 * *epsilon;
      eps_res = *epsilon - *eps_coef;
      // One query releasing every Gram/moment entry; with features in the
      // unit box each entry moves by at most 1 per record, so the L1
      // sensitivity is the number of released entries.
      double entries = static_cast<double>(p * (p + 1) / 2 + p);
      for (int i = 0; i < p; ++i) {
        for (int j = i; j < p; ++j) {
          double noisy = laplace_noise(gram(i, j), entries, eps_coef, rng);
          gram(i, j) = noisy;
          gram(j, i) = noisy;
        }
      }
      for (int i = 0; i < p; ++i) {
        moments(i) = laplace_noise(moments(i), entries, eps_coef, rng);
      }
    }

    // Ridge term keeps the (possibly noisy) Gram matrix solvable; escalate
    // until the factorization succeeds.
    Eigen::VectorXd w;
    double lambda = config.ridge_lambda;
    for (int attempt = 0; attempt < 8; ++attempt) {
      Eigen::MatrixXd m = gram + lambda * Eigen::MatrixXd::Identity(p, p);
      Eigen::FullPivLU<Eigen::MatrixXd> lu(m);
      if (lu.isInvertible()) {
        w = lu.solve(moments);
        if (w.allFinite()) break;
      }
      w.resize(0);
      lambda *= 1000.0;
    }
    if (w.size() == 0) {
      throw Error(ErrorCode::Internal,
                  "linear regression normal equations could not be solved");
    }
    weights_.assign(w.data(), w.data() + p);

    // Residual spread, with predictions clipped into the unit box so the
    // mean squared residual has sensitivity 1/n.
    double msr = 0.0;
    for (std::size_t r = 0; r < n; ++r) {
      double pred = std::clamp(phi.row(static_cast<Eigen::Index>(r)).dot(w), 0.0, 1.0);
      double d = y(static_cast<Eigen::Index>(r)) - pred;
      msr += d * d;
    }
    msr /= static_cast<double>(n);
    msr = laplace_noise(msr, 1.0 / static_cast<double>(n), eps_res, rng);
    residual_std_ = std::sqrt(std::max(msr, 0.0));
    if (config.max_residual_std.has_value()) {
      residual_std_ = std::min(residual_std_, *config.max_residual_std / range);
    }
  }

  void load_params(std::vector<double> weights, double residual_std,
                   ColumnType target_type, const NumericalBounds& tb) {
    if (weights.size() != static_cast<std::size_t>(encoder_.dim()) + 1) {
      throw_format("linear regression for '" + target_ + "' has the wrong weight count");
    }
    weights_ = std::move(weights);
    residual_std_ = residual_std;
    target_type_ = target_type;
    target_bounds_ = tb;
  }

  double residual_std() const { return residual_std_; }
  const std::vector<double>& weights() const { return weights_; }

 private:
  std::string target_;
  std::vector<std::string> parents_;
  FeatureEncoder encoder_;
  std::vector<double> weights_;  // encoded features then intercept
  double residual_std_ = 0.0;    // in rescaled units
  ColumnType target_type_ = ColumnType::Float;
  NumericalBounds target_bounds_;
};

// --- logistic regression ----------------------------------------------------

class LogisticRegressionMethod final : public FittedMethod {
 public:
  LogisticRegressionMethod(std::string target, std::vector<std::string> parents,
                           FeatureEncoder encoder, std::int32_t n_classes)
      : target_(std::move(target)),
        parents_(std::move(parents)),
        encoder_(std::move(encoder)),
        n_classes_(n_classes) {}

  MethodKind kind() const override { return MethodKind::LogisticRegression; }
  const std::vector<std::string>& parent_names() const override { return parents_; }
  const std::string& target_name() const override { return target_; }

  GenValue sample(std::span<const GenValue> parents, Rng& rng) const override {
    if (degenerate_class_ >= 0) return degenerate_class_;
    std::vector<double> x(static_cast<std::size_t>(encoder_.dim()) + 1, 1.0);
    encoder_.encode(parents, x.data());
    normalize_row(x);
    const auto d = static_cast<std::size_t>(encoder_.dim()) + 1;
    std::vector<double> scores(static_cast<std::size_t>(n_classes_), 0.0);
    for (std::int32_t c = 0; c < n_classes_; ++c) {
      const double* wc = weights_.data() + static_cast<std::size_t>(c) * d;
      double s = 0.0;
      for (std::size_t j = 0; j < d; ++j) s += wc[j] * x[j];
      scores[static_cast<std::size_t>(c)] = s;
    }
    double mx = *std::max_element(scores.begin(), scores.end());
    double total = 0.0;
    for (auto& s : scores) {
      s = std::exp(s - mx);
      total += s;
    }
    double u = rng.uniform01() * total;
    double acc = 0.0;
    for (std::int32_t c = 0; c < n_classes_; ++c) {
      acc += scores[static_cast<std::size_t>(c)];
      if (u <= acc) return c;
    }
    return n_classes_ - 1;
  }

  nlohmann::json to_json() const override {
    nlohmann::json j = {{"kind", to_string(MethodKind::LogisticRegression)},
                        {"target", target_},
                        {"parents", parents_}};
    if (degenerate_class_ >= 0) {
      j["degenerate_class"] = degenerate_class_;
    } else {
      j["weights"] = weights_;
    }
    return j;
  }

  // Predicted class distribution for one parent row; exposed for tests.
  std::vector<double> predict_distribution(std::span<const GenValue> parents) const {
    std::vector<double> x(static_cast<std::size_t>(encoder_.dim()) + 1, 1.0);
    encoder_.encode(parents, x.data());
    normalize_row(x);
    const auto d = static_cast<std::size_t>(encoder_.dim()) + 1;
    std::vector<double> p(static_cast<std::size_t>(n_classes_), 0.0);
    if (degenerate_class_ >= 0) {
      p[static_cast<std::size_t>(degenerate_class_)] = 1.0;
      return p;
    }
    for (std::int32_t c = 0; c < n_classes_; ++c) {
      const double* wc = weights_.data() + static_cast<std::size_t>(c) * d;
      double s = 0.0;
      for (std::size_t j = 0; j < d; ++j) s += wc[j] * x[j];
      p[static_cast<std::size_t>(c)] = s;
    }
    double mx = *std::max_element(p.begin(), p.end());
    double total = 0.0;
    for (auto& v : p) {
      v = std::exp(v - mx);
      total += v;
    }
    for (auto& v : p) v /= total;
    return p;
  }

  void fit(const Table& table, const Bounds& bounds, std::optional<double> epsilon,
           const MethodConfig& config, Rng& rng) {
    auto ref = resolve_column(table.schema, target_);
    const auto& cb = bounds.categorical(ref.index);
    const std::size_t n = table.row_count();
    const auto d = static_cast<std::size_t>(encoder_.dim()) + 1;

    std::vector<std::int32_t> labels(n);
    {
      const auto& col = table.categorical(ref.index);
      for (std::size_t r = 0; r < n; ++r) {
        int idx = cb.index_of(col[r]);
        if (idx < 0) {
          throw_invalid("value '" + col[r] + "' in column '" + target_ +
                        "' is not in the category list");
        }
        labels[r] = idx;
      }
    }
    std::vector<bool> observed(static_cast<std::size_t>(n_classes_), false);
    int observed_count = 0;
    for (auto c : labels) {
      if (!observed[static_cast<std::size_t>(c)]) {
        observed[static_cast<std::size_t>(c)] = true;
        ++observed_count;
      }
    }
    if (observed_count <= 1) {
      degenerate_class_ = labels.empty() ? 0 : labels[0];
      return;
    }

    auto rows = parent_rows(table, bounds, parents_);
    Eigen::MatrixXd x(n, d);
    for (std::size_t r = 0; r < n; ++r) {
      std::vector<double> row(d, 1.0);
      encoder_.encode(rows[r], row.data());
      normalize_row(row);
      for (std::size_t j = 0; j < d; ++j) {
        x(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(j)) = row[j];
      }
    }

    Eigen::MatrixXd w = minimize(x, labels, config);

    if (epsilon.has_value()) {
      // Output perturbation, one noise vector per class row, sequentially
      // composed across the class rows.
      double eps_class = *epsilon / static_cast<double>(n_classes_);
      double scale = 2.0 / (static_cast<double>(n) * config.logistic_lambda * eps_class);
      for (std::int32_t c = 0; c < n_classes_; ++c) {
        double norm = rng.gamma_int(static_cast<int>(d), scale);
        auto dir = rng.unit_vector(static_cast<int>(d));
        for (std::size_t j = 0; j < d; ++j) {
          w(c, static_cast<Eigen::Index>(j)) += norm * dir[j];
        }
      }
    }

    weights_.resize(static_cast<std::size_t>(n_classes_) * d);
    for (std::int32_t c = 0; c < n_classes_; ++c) {
      for (std::size_t j = 0; j < d; ++j) {
        weights_[static_cast<std::size_t>(c) * d + j] = w(c, static_cast<Eigen::Index>(j));
      }
    }
  }

  void load_params(std::vector<double> weights, std::int32_t degenerate_class) {
    degenerate_class_ = degenerate_class;
    if (degenerate_class_ >= 0) {
      if (degenerate_class_ >= n_classes_) {
        throw_format("logistic regression for '" + target_ + "' has a bad class index");
      }
      return;
    }
    const auto d = static_cast<std::size_t>(encoder_.dim()) + 1;
    if (weights.size() != static_cast<std::size_t>(n_classes_) * d) {
      throw_format("logistic regression for '" + target_ + "' has the wrong weight count");
    }
    weights_ = std::move(weights);
  }

 private:
  static void normalize_row(std::vector<double>& row) {
    double sq = 0.0;
    for (double v : row) sq += v * v;
    double norm = std::sqrt(sq);
    if (norm > 1.0) {
      for (auto& v : row) v /= norm;
    }
  }

  // Nesterov-accelerated gradient descent on the L2-regularized multinomial
  // objective; strongly convex, so the fixed step 1/L with momentum from the
  // condition number converges linearly.
  Eigen::MatrixXd minimize(const Eigen::MatrixXd& x,
                           const std::vector<std::int32_t>& labels,
                           const MethodConfig& config) const {
    const auto n = x.rows();
    const auto d = x.cols();
    const double lambda = config.logistic_lambda;
    const double lip = 0.5 + lambda;  // rows have norm <= 1
    const double q = lambda / lip;
    const double beta = (1.0 - std::sqrt(q)) / (1.0 + std::sqrt(q));

    Eigen::MatrixXd w = Eigen::MatrixXd::Zero(n_classes_, d);
    Eigen::MatrixXd v = w;
    Eigen::MatrixXd scores(n, n_classes_);
    for (int it = 0; it < config.logistic_max_iters; ++it) {
      scores.noalias() = x * v.transpose();
      for (Eigen::Index r = 0; r < n; ++r) {
        double mx = scores.row(r).maxCoeff();
        double total = 0.0;
        for (Eigen::Index c = 0; c < n_classes_; ++c) {
          double e = std::exp(scores(r, c) - mx);
          scores(r, c) = e;
          total += e;
        }
        scores.row(r) /= total;
        scores(r, labels[static_cast<std::size_t>(r)]) -= 1.0;
      }
      Eigen::MatrixXd grad = (scores.transpose() * x) / static_cast<double>(n);
      grad.noalias() += lambda * v;
      if (grad.norm() < config.logistic_tol) {
        w = v;
        break;
      }
      Eigen::MatrixXd w_next = v - grad / lip;
      v = w_next + beta * (w_next - w);
      w = w_next;
    }
    return w;
  }

  std::string target_;
  std::vector<std::string> parents_;
  FeatureEncoder encoder_;
  std::int32_t n_classes_ = 0;
  std::vector<double> weights_;  // class-major, row length dim + 1
  std::int32_t degenerate_class_ = -1;
};

}  // namespace

// --- factory ----------------------------------------------------------------

std::unique_ptr<FittedMethod> fit_method(MethodKind kind, const Table& table,
                                         const Bounds& bounds,
                                         const std::vector<std::string>& parent_names,
                                         const std::string& target,
                                         std::optional<double> epsilon,
                                         const MethodConfig& config, Rng& rng) {
  auto ref = resolve_column(table.schema, target);
  if (!method_supports(kind, ref.type)) {
    throw_invalid(std::string("method ") + to_string(kind) + " does not support " +
                  to_string(ref.type) + " column '" + target + "'");
  }
  switch (kind) {
    case MethodKind::HistogramSampler:
    case MethodKind::ConditionalDistribution: {
      // The histogram sampler is the conditional distribution with no
      // parents.
      auto use_parents =
          kind == MethodKind::HistogramSampler ? std::vector<std::string>{} : parent_names;
      auto m = ConditionalDistributionMethod::create(kind, table.schema, bounds,
                                                     use_parents, target, config);
      m->fit(table, bounds, epsilon, rng);
      return m;
    }
    case MethodKind::LinearRegression: {
      auto m = std::make_unique<LinearRegressionMethod>(
          target, parent_names, FeatureEncoder(table.schema, bounds, parent_names));
      m->fit(table, bounds, epsilon, config, rng);
      return m;
    }
    case MethodKind::LogisticRegression: {
      auto classes = static_cast<std::int32_t>(
          bounds.categorical(ref.index).categories.size());
      auto m = std::make_unique<LogisticRegressionMethod>(
          target, parent_names, FeatureEncoder(table.schema, bounds, parent_names),
          classes);
      m->fit(table, bounds, epsilon, config, rng);
      return m;
    }
  }
  throw Error(ErrorCode::Internal, "unhandled method kind");
}

std::unique_ptr<FittedMethod> method_from_json(const nlohmann::json& doc,
                                               const Schema& schema,
                                               const Bounds& bounds,
                                               const MethodConfig& config) {
  MethodKind kind = method_kind_from_string(doc.at("kind").get<std::string>());
  std::string target = doc.at("target").get<std::string>();
  auto parents = doc.at("parents").get<std::vector<std::string>>();
  auto ref = resolve_column(schema, target);

  switch (kind) {
    case MethodKind::HistogramSampler:
    case MethodKind::ConditionalDistribution: {
      auto m = ConditionalDistributionMethod::create(kind, schema, bounds, parents,
                                                     target, config);
      m->load_probs(doc.at("probs").get<std::vector<double>>());
      return m;
    }
    case MethodKind::LinearRegression: {
      auto m = std::make_unique<LinearRegressionMethod>(
          target, parents, FeatureEncoder(schema, bounds, parents));
      m->load_params(doc.at("weights").get<std::vector<double>>(),
                     doc.at("residual_std").get<double>(), ref.type,
                     bounds.numerical(ref.index));
      return m;
    }
    case MethodKind::LogisticRegression: {
      auto classes = static_cast<std::int32_t>(
          bounds.categorical(ref.index).categories.size());
      auto m = std::make_unique<LogisticRegressionMethod>(
          target, parents, FeatureEncoder(schema, bounds, parents), classes);
      if (doc.contains("degenerate_class")) {
        m->load_params({}, doc["degenerate_class"].get<std::int32_t>());
      } else {
        m->load_params(doc.at("weights").get<std::vector<double>>(), -1);
      }
      return m;
    }
  }
  throw Error(ErrorCode::Internal, "unhandled method kind");
}

}  // namespace dpart
