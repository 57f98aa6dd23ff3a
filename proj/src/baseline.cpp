#include "rst/baseline.hpp"

#include <cmath>
#include <iomanip>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <random>
#include <sstream>

#include "rst/error.hpp"

namespace rst::baseline {

namespace {

std::string shape(const Matrix& m) {
  return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

void require_finite(const Vector& v, const char* what) {
  if (!v.allFinite()) throw Error(std::string(what) + " has non-finite entries");
}

void check_biaffine(const Biaffine& b, Eigen::Index h, const std::string& name) {
  if (b.w.rows() != h || b.w.cols() != h || b.v_left.size() != h ||
      b.v_right.size() != h) {
    throw DimensionMismatch(name + ": expected " + std::to_string(h) +
                            "-dim biaffine, W is " + shape(b.w));
  }
}

Biaffine make_biaffine(Eigen::Index h, const std::function<double()>& draw) {
  Biaffine b{Matrix(h, h), Vector(h), Vector(h)};
  for (Eigen::Index i = 0; i < h; ++i) {
    for (Eigen::Index j = 0; j < h; ++j) b.w(i, j) = draw();
  }
  for (Eigen::Index i = 0; i < h; ++i) b.v_left(i) = draw();
  for (Eigen::Index i = 0; i < h; ++i) b.v_right(i) = draw();
  return b;
}

Projection make_projection(Eigen::Index d, Eigen::Index h,
                           const std::function<double()>& draw) {
  Projection p{Matrix(h, d), Vector(h)};
  for (Eigen::Index i = 0; i < h; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) p.weight(i, j) = draw();
  }
  for (Eigen::Index i = 0; i < h; ++i) p.bias(i) = draw();
  return p;
}

BiaffineParams make_params(Eigen::Index d, Eigen::Index h,
                           std::vector<std::string> labels,
                           const std::function<double()>& draw) {
  BiaffineParams p;
  p.left = make_projection(d, h, draw);
  p.right = make_projection(d, h, draw);
  p.split = make_biaffine(h, draw);
  p.labels = std::move(labels);
  for (std::size_t i = 0; i < p.labels.size(); ++i) {
    p.label_params.push_back(make_biaffine(h, draw));
  }
  p.validate();
  return p;
}

}  // namespace

void BiaffineParams::validate() const {
  const Eigen::Index d = input_dim();
  const Eigen::Index h = hidden_dim();
  for (const Projection* p : {&left, &right}) {
    if (p->weight.rows() != h || p->weight.cols() != d ||
        p->bias.size() != h) {
      throw DimensionMismatch("projection shapes disagree: " +
                              shape(p->weight) + " with bias " +
                              std::to_string(p->bias.size()));
    }
  }
  check_biaffine(split, h, "split");
  if (labels.size() != label_params.size()) {
    throw DimensionMismatch("label list and label parameters differ in size");
  }
  for (std::size_t i = 0; i < labels.size(); ++i) {
    check_biaffine(label_params[i], h, "label '" + labels[i] + "'");
  }
}

const Biaffine& BiaffineParams::label(std::string_view name) const {
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] == name) return label_params[i];
  }
  throw DimensionMismatch("unknown label '" + std::string(name) + "'");
}

BiaffineParams BiaffineParams::zeros(Eigen::Index input_dim,
                                     Eigen::Index hidden_dim,
                                     std::vector<std::string> labels) {
  return make_params(input_dim, hidden_dim, std::move(labels),
                     [] { return 0.0; });
}

BiaffineParams BiaffineParams::random(Eigen::Index input_dim,
                                      Eigen::Index hidden_dim,
                                      std::vector<std::string> labels,
                                      std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  return make_params(input_dim, hidden_dim, std::move(labels),
                     [&] { return dist(rng); });
}

std::vector<std::string> label_set(const LabelInventory& inventory) {
  std::vector<std::string> out;
  for (Nuclearity n : kAllNuclearities) out.emplace_back(to_string(n));
  for (const auto& r : inventory.relations()) out.push_back(r);
  return out;
}

Vector project(const Vector& u, Side side, const BiaffineParams& params) {
  const Projection& p = side == Side::Left ? params.left : params.right;
  if (u.size() != p.weight.cols()) {
    throw DimensionMismatch("span vector has dimension " +
                            std::to_string(u.size()) + ", projection expects " +
                            std::to_string(p.weight.cols()));
  }
  require_finite(u, "span vector");
  Vector h = p.weight * u + p.bias;
  if (params.use_tanh) h = h.array().tanh().matrix();
  return h;
}

double biaffine_score(const Vector& h_left, const Vector& h_right,
                      const Biaffine& b) {
  if (h_left.size() != b.w.rows() || h_right.size() != b.w.cols()) {
    throw DimensionMismatch("hidden vectors do not match W (" + shape(b.w) +
                            ")");
  }
  return h_left.dot(b.w * h_right) + b.v_left.dot(h_left) +
         b.v_right.dot(h_right);
}

double split_score(const Vector& h_left, const Vector& h_right,
                   const BiaffineParams& params) {
  return biaffine_score(h_left, h_right, params.split);
}

double label_score(const Vector& h_left, const Vector& h_right,
                   std::string_view label, const BiaffineParams& params) {
  return biaffine_score(h_left, h_right, params.label(label));
}

std::vector<SplitCandidate> split_candidates(Span span,
                                             const SpanEncoder& encode) {
  std::vector<SplitCandidate> out;
  for (int k = 0; k + 1 < span.length(); ++k) {
    const int mid = span.first + k;
    out.push_back({encode({span.first, mid}), encode({mid + 1, span.last})});
  }
  return out;
}

std::size_t argmax_first(std::span<const double> scores) {
  if (scores.empty()) throw NoCandidates("argmax over an empty set");
  std::size_t best = 0;
  for (std::size_t i = 1; i < scores.size(); ++i) {
    if (scores[i] > scores[best]) best = i;
  }
  return best;
}

namespace {

double candidate_score(const SplitCandidate& c, const BiaffineParams& params) {
  return split_score(project(c.left, Side::Left, params),
                     project(c.right, Side::Right, params), params);
}

std::vector<std::string> resolve_labels(const BiaffineParams& params,
                                        std::span<const std::string> labels) {
  std::vector<std::string> out(labels.begin(), labels.end());
  if (out.empty()) out = params.labels;
  if (out.empty()) throw NoCandidates("no labels to choose from");
  return out;
}

std::string pick_label(const std::vector<std::string>& names,
                       const std::vector<double>& scores) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < names.size(); ++i) {
    if (scores[i] > scores[best] ||
        (scores[i] == scores[best] && names[i] < names[best])) {
      best = i;
    }
  }
  return names[best];
}

}  // namespace

int best_split_serial(std::span<const SplitCandidate> candidates,
                      const BiaffineParams& params) {
  if (candidates.empty()) throw NoCandidates("span has no split points");
  std::vector<double> scores(candidates.size());
  for (std::size_t k = 0; k < candidates.size(); ++k) {
    scores[k] = candidate_score(candidates[k], params);
  }
  return static_cast<int>(argmax_first(scores));
}

int best_split(std::span<const SplitCandidate> candidates,
               const BiaffineParams& params) {
  if (candidates.empty()) throw NoCandidates("span has no split points");
  const auto n = static_cast<std::ptrdiff_t>(candidates.size());
  std::vector<double> scores(candidates.size());
  std::exception_ptr failure;
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t k = 0; k < n; ++k) {
    try {
      scores[static_cast<std::size_t>(k)] =
          candidate_score(candidates[static_cast<std::size_t>(k)], params);
    } catch (...) {
#pragma omp critical(rst_best_split_failure)
      failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
  return static_cast<int>(argmax_first(scores));
}

std::string best_label_serial(const Vector& h_left, const Vector& h_right,
                              const BiaffineParams& params,
                              std::span<const std::string> labels) {
  const auto names = resolve_labels(params, labels);
  std::vector<double> scores(names.size());
  for (std::size_t i = 0; i < names.size(); ++i) {
    scores[i] = label_score(h_left, h_right, names[i], params);
  }
  return pick_label(names, scores);
}

std::string best_label(const Vector& h_left, const Vector& h_right,
                       const BiaffineParams& params,
                       std::span<const std::string> labels) {
  const auto names = resolve_labels(params, labels);
  const auto n = static_cast<std::ptrdiff_t>(names.size());
  std::vector<double> scores(names.size());
  std::exception_ptr failure;
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    try {
      const auto u = static_cast<std::size_t>(i);
      scores[u] = label_score(h_left, h_right, names[u], params);
    } catch (...) {
#pragma omp critical(rst_best_label_failure)
      failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
  return pick_label(names, scores);
}

Vector concat_features(const Vector& u_s0, const Vector& u_s1,
                       const Vector& u_q0) {
  if (u_s0.size() != u_s1.size() || u_s0.size() != u_q0.size()) {
    throw DimensionMismatch("concat inputs differ in dimension");
  }
  const Eigen::Index d = u_s0.size();
  Vector out(3 * d);
  out << u_s0, u_s1, u_q0;
  return out;
}

// ---------------------------------------------------------------------------
// Parameter files

namespace {

constexpr std::string_view kMagic = "rst-biaffine";

void write_matrix(std::ostream& out, const std::string& name, const Matrix& m) {
  out << "matrix " << name << ' ' << m.rows() << ' ' << m.cols() << '\n';
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      out << (j ? " " : "") << m(i, j);
    }
    out << '\n';
  }
}

void write_vector(std::ostream& out, const std::string& name, const Vector& v) {
  out << "vector " << name << ' ' << v.size() << '\n';
  for (Eigen::Index i = 0; i < v.size(); ++i) out << (i ? " " : "") << v(i);
  out << '\n';
}

void write_biaffine(std::ostream& out, const std::string& prefix,
                    const Biaffine& b) {
  write_matrix(out, prefix + ".W", b.w);
  write_vector(out, prefix + ".v_left", b.v_left);
  write_vector(out, prefix + ".v_right", b.v_right);
}

class Reader {
 public:
  explicit Reader(std::istream& in) : in_(in) {}

  std::string word() {
    std::string w;
    if (!(in_ >> w)) throw SyntaxError("parameter file ended early");
    return w;
  }
  long long integer() {
    const std::string w = word();
    try {
      std::size_t used = 0;
      const long long v = std::stoll(w, &used);
      if (used != w.size() || v < 0) throw std::invalid_argument(w);
      return v;
    } catch (const std::exception&) {
      throw SyntaxError("expected a non-negative integer, got '" + w + "'");
    }
  }
  double real() {
    const std::string w = word();
    try {
      std::size_t used = 0;
      const double v = std::stod(w, &used);
      if (used != w.size()) throw std::invalid_argument(w);
      return v;
    } catch (const std::exception&) {
      throw SyntaxError("expected a real number, got '" + w + "'");
    }
  }
  void expect(std::string_view w) {
    const std::string got = word();
    if (got != w) {
      throw SyntaxError("expected '" + std::string(w) + "', got '" + got + "'");
    }
  }
  std::string line() {
    std::string l;
    in_ >> std::ws;
    std::getline(in_, l);
    return normalize_whitespace(l);
  }

 private:
  std::istream& in_;
};

}  // namespace

void save_params(std::ostream& out, const BiaffineParams& params) {
  params.validate();
  const auto old_precision = out.precision(17);
  out << kMagic << " 1\n";
  out << "input_dim " << params.input_dim() << '\n';
  out << "hidden_dim " << params.hidden_dim() << '\n';
  out << "activation " << (params.use_tanh ? "tanh" : "none") << '\n';
  out << "labels " << params.labels.size() << '\n';
  for (const auto& l : params.labels) out << l << '\n';
  write_matrix(out, "left.weight", params.left.weight);
  write_vector(out, "left.bias", params.left.bias);
  write_matrix(out, "right.weight", params.right.weight);
  write_vector(out, "right.bias", params.right.bias);
  write_biaffine(out, "split", params.split);
  for (std::size_t i = 0; i < params.labels.size(); ++i) {
    write_biaffine(out, "label." + std::to_string(i), params.label_params[i]);
  }
  out.precision(old_precision);
}

BiaffineParams load_params(std::istream& in) {
  Reader r(in);
  r.expect(kMagic);
  r.expect("1");
  r.expect("input_dim");
  const auto d = static_cast<Eigen::Index>(r.integer());
  r.expect("hidden_dim");
  const auto h = static_cast<Eigen::Index>(r.integer());
  r.expect("activation");
  const std::string act = r.word();
  if (act != "tanh" && act != "none") {
    throw SyntaxError("unknown activation '" + act + "'");
  }
  r.expect("labels");
  const auto n_labels = static_cast<std::size_t>(r.integer());
  std::vector<std::string> labels;
  for (std::size_t i = 0; i < n_labels; ++i) labels.push_back(r.line());

  BiaffineParams p = BiaffineParams::zeros(d, h, labels);
  p.use_tanh = act == "tanh";

  std::map<std::string, Matrix*> matrices{{"left.weight", &p.left.weight},
                                          {"right.weight", &p.right.weight},
                                          {"split.W", &p.split.w}};
  std::map<std::string, Vector*> vectors{{"left.bias", &p.left.bias},
                                         {"right.bias", &p.right.bias},
                                         {"split.v_left", &p.split.v_left},
                                         {"split.v_right", &p.split.v_right}};
  for (std::size_t i = 0; i < n_labels; ++i) {
    const std::string pre = "label." + std::to_string(i);
    matrices[pre + ".W"] = &p.label_params[i].w;
    vectors[pre + ".v_left"] = &p.label_params[i].v_left;
    vectors[pre + ".v_right"] = &p.label_params[i].v_right;
  }

  const std::size_t expected_blocks = matrices.size() + vectors.size();
  std::size_t seen = 0;
  while (seen < expected_blocks) {
    const std::string kind = r.word();
    const std::string name = r.word();
    if (kind == "matrix") {
      auto it = matrices.find(name);
      if (it == matrices.end()) throw SyntaxError("unexpected block " + name);
      const auto rows = static_cast<Eigen::Index>(r.integer());
      const auto cols = static_cast<Eigen::Index>(r.integer());
      Matrix& m = *it->second;
      if (rows != m.rows() || cols != m.cols()) {
        throw DimensionMismatch(name + " declared " + std::to_string(rows) +
                                "x" + std::to_string(cols) + ", expected " +
                                shape(m));
      }
      for (Eigen::Index i = 0; i < rows; ++i) {
        for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = r.real();
      }
      matrices.erase(it);
    } else if (kind == "vector") {
      auto it = vectors.find(name);
      if (it == vectors.end()) throw SyntaxError("unexpected block " + name);
      const auto size = static_cast<Eigen::Index>(r.integer());
      Vector& v = *it->second;
      if (size != v.size()) {
        throw DimensionMismatch(name + " declared size " +
                                std::to_string(size) + ", expected " +
                                std::to_string(v.size()));
      }
      for (Eigen::Index i = 0; i < size; ++i) v(i) = r.real();
      vectors.erase(it);
    } else {
      throw SyntaxError("expected 'matrix' or 'vector', got '" + kind + "'");
    }
    ++seen;
  }
  p.validate();
  return p;
}

}  // namespace rst::baseline
