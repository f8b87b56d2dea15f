#include "kway/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <unordered_map>

#include "kway/error.hpp"
#include "kway/stats.hpp"

namespace kway::eval {

namespace {

std::unordered_map<std::string, std::int64_t> word_index(
    const EmbeddingModel& model) {
  std::unordered_map<std::string, std::int64_t> index;
  index.reserve(model.words.size());
  for (std::size_t i = 0; i < model.words.size(); ++i)
    index.emplace(model.words[i], static_cast<std::int64_t>(i));
  return index;
}

std::int64_t lookup(const std::unordered_map<std::string, std::int64_t>& index,
                    const std::string& w) {
  auto it = index.find(w);
  return it == index.end() ? -1 : it->second;
}

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  for (;;) {
    std::size_t tab = line.find('\t', start);
    if (tab == std::string::npos) {
      fields.push_back(line.substr(start));
      return fields;
    }
    fields.push_back(line.substr(start, tab - start));
    start = tab + 1;
  }
}

std::ifstream open_or_throw(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw format_error("cannot open file: " + path);
  return in;
}

}  // namespace

double cosine(std::span<const double> u, std::span<const double> v) {
  if (u.size() != v.size())
    throw std::invalid_argument("cosine: dimension mismatch");
  double uu = squared_norm(u);
  double vv = squared_norm(v);
  if (uu == 0.0 || vv == 0.0) return 0.0;
  return dot(u, v) / std::sqrt(uu * vv);
}

EvalReport eval_similarity(const EmbeddingModel& model,
                           const SimilarityDataset& ds) {
  auto index = word_index(model);
  std::vector<double> scores, ratings;
  std::size_t zero_vectors = 0;
  for (const auto& row : ds.rows) {
    std::int64_t i = lookup(index, row.word1);
    std::int64_t j = lookup(index, row.word2);
    if (i < 0 || j < 0) continue;
    auto u = model.vectors.row(i);
    auto v = model.vectors.row(j);
    if (squared_norm(u) == 0.0 || squared_norm(v) == 0.0) ++zero_vectors;
    scores.push_back(cosine(u, v));
    ratings.push_back(row.rating);
  }
  if (scores.empty())
    throw std::invalid_argument("no in-vocabulary pairs in dataset " + ds.name);

  EvalReport report;
  report.dataset = ds.name;
  report.metric = "spearman";
  report.coverage =
      static_cast<double>(scores.size()) / static_cast<double>(ds.rows.size());
  if (scores.size() < 2) {
    report.value = std::nan("");
    report.notes = "fewer than 2 usable pairs";
    return report;
  }
  auto rho = stats::spearman(scores, ratings);
  if (!rho.has_value()) {
    report.value = std::nan("");
    report.notes = "degenerate ranks";
  } else {
    report.value = *rho;
    if (scores.size() >= 4 && std::abs(*rho) < 1.0) {
      auto t = stats::fisher_rho_test(*rho,
                                      static_cast<std::int64_t>(scores.size()));
      char buf[96];
      std::snprintf(buf, sizeof(buf), "fisher z=%.4g p=%.4g", t.z, t.p);
      report.notes = buf;
    }
  }
  if (zero_vectors > 0) {
    if (!report.notes.empty()) report.notes += "; ";
    report.notes += "zero vectors on " + std::to_string(zero_vectors) + " rows";
  }
  return report;
}

namespace {

// 95% Clopper-Pearson interval annotation for accuracy metrics.
std::string accuracy_ci_note(std::size_t correct, std::size_t total) {
  if (total == 0) return "";
  auto iv = stats::clopper_pearson_interval(static_cast<std::int64_t>(correct),
                                            static_cast<std::int64_t>(total), 0.05);
  char buf[96];
  std::snprintf(buf, sizeof(buf), "ci95=[%.4g, %.4g]", iv.lower, iv.upper);
  return buf;
}

}  // namespace

EvalReport eval_analogy_cosadd(const EmbeddingModel& model,
                               const AnalogyDataset& ds) {
  auto index = word_index(model);
  const int d = model.dim();
  std::size_t covered = 0, answerable = 0, correct = 0;
  std::vector<double> query(static_cast<std::size_t>(d));

  for (const auto& row : ds.rows) {
    std::int64_t a = lookup(index, row.a);
    std::int64_t b = lookup(index, row.b);
    std::int64_t c = lookup(index, row.c);
    std::int64_t gold = lookup(index, row.gold);
    if (a < 0 || b < 0 || c < 0 || gold < 0) continue;
    ++covered;
    if (gold == a || gold == b || gold == c) continue;  // excluded as a query word
    ++answerable;

    auto va = model.vectors.row(a);
    auto vb = model.vectors.row(b);
    auto vc = model.vectors.row(c);
    for (int t = 0; t < d; ++t)
      query[static_cast<std::size_t>(t)] = vb[static_cast<std::size_t>(t)] -
                                           va[static_cast<std::size_t>(t)] +
                                           vc[static_cast<std::size_t>(t)];

    std::int64_t best = -1;
    double best_score = 0.0;
    for (std::int64_t w = 0; w < model.vocab_size(); ++w) {
      if (w == a || w == b || w == c) continue;
      double score = cosine(query, model.vectors.row(w));
      if (best < 0 || score > best_score) {  // ties keep the lower id
        best = w;
        best_score = score;
      }
    }
    if (best == gold) ++correct;
  }

  if (covered == 0)
    throw std::invalid_argument("no in-vocabulary rows in dataset " + ds.name);

  EvalReport report;
  report.dataset = ds.name;
  report.metric = "accuracy";
  report.coverage =
      static_cast<double>(covered) / static_cast<double>(ds.rows.size());
  report.value = answerable == 0
                     ? std::nan("")
                     : static_cast<double>(correct) / static_cast<double>(answerable);
  report.notes = accuracy_ci_note(correct, answerable);
  if (answerable < covered) {
    if (!report.notes.empty()) report.notes += "; ";
    report.notes +=
        std::to_string(covered - answerable) + " unanswerable rows excluded";
  }
  return report;
}

EvalReport eval_relation_diffvec(const EmbeddingModel& model,
                                 const RelationDataset& ds) {
  auto index = word_index(model);
  const int d = model.dim();

  std::vector<std::vector<double>> offsets;
  std::vector<std::size_t> labels;  // relation id per usable row
  std::unordered_map<std::string, std::size_t> relation_ids;
  for (const auto& row : ds.rows) {
    std::int64_t i = lookup(index, row.word1);
    std::int64_t j = lookup(index, row.word2);
    if (i < 0 || j < 0) continue;
    auto u = model.vectors.row(i);
    auto v = model.vectors.row(j);
    std::vector<double> off(static_cast<std::size_t>(d));
    for (int t = 0; t < d; ++t)
      off[static_cast<std::size_t>(t)] =
          v[static_cast<std::size_t>(t)] - u[static_cast<std::size_t>(t)];
    offsets.push_back(std::move(off));
    labels.push_back(
        relation_ids.try_emplace(row.relation, relation_ids.size()).first->second);
  }
  if (offsets.size() < 2)
    throw std::invalid_argument("fewer than 2 usable rows in dataset " + ds.name);

  std::size_t correct = 0;
  for (std::size_t i = 0; i < offsets.size(); ++i) {
    std::size_t best = offsets.size();
    double best_score = 0.0;
    for (std::size_t j = 0; j < offsets.size(); ++j) {
      if (j == i) continue;
      double score = cosine(offsets[i], offsets[j]);
      if (best == offsets.size() || score > best_score) {
        best = j;
        best_score = score;
      }
    }
    if (labels[best] == labels[i]) ++correct;
  }

  EvalReport report;
  report.dataset = ds.name;
  report.metric = "accuracy";
  report.coverage =
      static_cast<double>(offsets.size()) / static_cast<double>(ds.rows.size());
  report.value =
      static_cast<double>(correct) / static_cast<double>(offsets.size());
  report.notes = accuracy_ci_note(correct, offsets.size());
  return report;
}

std::optional<std::vector<double>> centroid(const EmbeddingModel& model,
                                            std::span<const std::string> tokens) {
  auto index = word_index(model);
  std::vector<double> sum(static_cast<std::size_t>(model.dim()), 0.0);
  std::size_t used = 0;
  for (const auto& tok : tokens) {
    std::int64_t id = lookup(index, tok);
    if (id < 0) continue;
    auto row = model.vectors.row(id);
    for (std::size_t c = 0; c < sum.size(); ++c) sum[c] += row[c];
    ++used;
  }
  if (used == 0) return std::nullopt;
  for (auto& x : sum) x /= static_cast<double>(used);
  return sum;
}

LogRegModel train_logreg(const std::vector<std::vector<double>>& features,
                         const std::vector<int>& labels, int epochs, double lr) {
  if (features.size() != labels.size() || features.empty())
    throw std::invalid_argument("logreg: features and labels must align");
  bool has0 = false, has1 = false;
  for (int y : labels) (y == 0 ? has0 : has1) = true;
  if (!has0 || !has1)
    throw std::invalid_argument("logreg: both classes must be present");

  const std::size_t m = features.size();
  const std::size_t d = features.front().size();
  LogRegModel model;
  model.weights.assign(d, 0.0);

  std::vector<double> grad(d);
  for (int e = 0; e < epochs; ++e) {
    std::fill(grad.begin(), grad.end(), 0.0);
    double grad_b = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      double p = logreg_probability(model, features[i]);
      double err = p - static_cast<double>(labels[i]);
      for (std::size_t c = 0; c < d; ++c) grad[c] += err * features[i][c];
      grad_b += err;
    }
    for (std::size_t c = 0; c < d; ++c)
      model.weights[c] -= lr * grad[c] / static_cast<double>(m);
    model.intercept -= lr * grad_b / static_cast<double>(m);
  }
  return model;
}

double logreg_probability(const LogRegModel& m, std::span<const double> x) {
  return sigmoid(dot(m.weights, x) + m.intercept);
}

double logreg_mean_loss(const LogRegModel& m,
                        const std::vector<std::vector<double>>& features,
                        const std::vector<int>& labels) {
  double loss = 0.0;
  for (std::size_t i = 0; i < features.size(); ++i) {
    double z = dot(std::span<const double>(m.weights), std::span<const double>(features[i])) +
               m.intercept;
    // log(1 + exp(-z)) for y=1, log(1 + exp(z)) for y=0, stably.
    double s = labels[i] == 1 ? -z : z;
    loss += s > 0 ? s + std::log1p(std::exp(-s)) : std::log1p(std::exp(s));
  }
  return loss / static_cast<double>(features.size());
}

EvalReport eval_textclass(const EmbeddingModel& model, const TextDataset& ds,
                          int epochs, double lr) {
  std::vector<std::vector<double>> train_x;
  std::vector<int> train_y;
  for (const auto& row : ds.train) {
    auto c = centroid(model, row.tokens);
    if (!c.has_value()) continue;
    train_x.push_back(std::move(*c));
    train_y.push_back(row.label);
  }
  if (train_x.empty())
    throw std::invalid_argument("no usable training rows in dataset " + ds.name);

  auto clf = train_logreg(train_x, train_y, epochs, lr);

  std::size_t usable_test = 0, correct = 0;
  for (const auto& row : ds.test) {
    auto c = centroid(model, row.tokens);
    if (!c.has_value()) continue;
    ++usable_test;
    int predicted = logreg_probability(clf, *c) >= 0.5 ? 1 : 0;
    if (predicted == row.label) ++correct;
  }

  EvalReport report;
  report.dataset = ds.name;
  report.metric = "accuracy";
  std::size_t total = ds.train.size() + ds.test.size();
  report.coverage = total == 0
                        ? 0.0
                        : static_cast<double>(train_x.size() + usable_test) /
                              static_cast<double>(total);
  report.value = usable_test == 0
                     ? std::nan("")
                     : static_cast<double>(correct) / static_cast<double>(usable_test);
  report.notes =
      usable_test == 0 ? "no usable test rows" : accuracy_ci_note(correct, usable_test);
  return report;
}

SimilarityDataset normalize_ratings(const SimilarityDataset& ds) {
  if (ds.rows.empty())
    throw std::invalid_argument("cannot normalize empty dataset " + ds.name);
  double lo = ds.rows.front().rating, hi = lo;
  for (const auto& row : ds.rows) {
    lo = std::min(lo, row.rating);
    hi = std::max(hi, row.rating);
  }
  SimilarityDataset out;
  out.name = ds.name;
  out.rows.reserve(ds.rows.size());
  for (const auto& row : ds.rows) {
    double r = hi == lo ? 0.5 : (row.rating - lo) / (hi - lo);
    out.rows.push_back(SimilarityRow{row.word1, row.word2, r});
  }
  return out;
}

std::vector<DivergencePair> divergence_report(const EmbeddingModel& model_a,
                                              const EmbeddingModel& model_b,
                                              const SimilarityDataset& pooled) {
  auto index_a = word_index(model_a);
  auto index_b = word_index(model_b);

  struct Shared {
    const SimilarityRow* row;
    double score_a, score_b;
  };
  std::vector<Shared> shared;
  for (const auto& row : pooled.rows) {
    std::int64_t a1 = lookup(index_a, row.word1), a2 = lookup(index_a, row.word2);
    std::int64_t b1 = lookup(index_b, row.word1), b2 = lookup(index_b, row.word2);
    if (a1 < 0 || a2 < 0 || b1 < 0 || b2 < 0) continue;
    shared.push_back(Shared{
        &row, cosine(model_a.vectors.row(a1), model_a.vectors.row(a2)),
        cosine(model_b.vectors.row(b1), model_b.vectors.row(b2))});
  }
  if (shared.size() < 2)
    throw std::invalid_argument("models share fewer than 2 pairs of " +
                                pooled.name);

  auto standardize = [&](auto getter) {
    std::vector<double> v(shared.size());
    for (std::size_t i = 0; i < shared.size(); ++i) v[i] = getter(shared[i]);
    double m = stats::mean(v);
    double sd = std::sqrt(stats::sample_variance(v));
    for (auto& x : v) x = sd == 0.0 ? 0.5 : (x - m) / sd + 0.5;
    return v;
  };
  auto za = standardize([](const Shared& s) { return s.score_a; });
  auto zb = standardize([](const Shared& s) { return s.score_b; });

  std::vector<double> diffs(shared.size());
  for (std::size_t i = 0; i < shared.size(); ++i) diffs[i] = za[i] - zb[i];
  double sd_diff = std::sqrt(stats::sample_variance(diffs));

  std::vector<DivergencePair> out;
  for (std::size_t i = 0; i < shared.size(); ++i) {
    if (std::abs(diffs[i]) > sd_diff) {
      out.push_back(DivergencePair{shared[i].row->word1, shared[i].row->word2,
                                   za[i], zb[i], shared[i].row->rating,
                                   diffs[i]});
    }
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const DivergencePair& x, const DivergencePair& y) {
                     return std::abs(x.difference) > std::abs(y.difference);
                   });
  return out;
}

SimilarityDataset read_similarity(const std::string& path, std::string name) {
  auto in = open_or_throw(path);
  SimilarityDataset ds;
  ds.name = std::move(name);
  std::string line;
  std::int64_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    auto f = split_tabs(line);
    if (f.size() != 3)
      throw format_error(path + " line " + std::to_string(lineno) +
                         ": expected word1<TAB>word2<TAB>rating");
    double rating;
    try {
      rating = std::stod(f[2]);
    } catch (const std::exception&) {
      throw format_error(path + " line " + std::to_string(lineno) +
                         ": non-numeric rating");
    }
    if (!std::isfinite(rating))
      throw format_error(path + " line " + std::to_string(lineno) +
                         ": rating must be finite");
    ds.rows.push_back(SimilarityRow{f[0], f[1], rating});
  }
  if (ds.rows.empty()) throw format_error(path + ": empty dataset");
  return ds;
}

AnalogyDataset read_analogy(const std::string& path, std::string name) {
  auto in = open_or_throw(path);
  AnalogyDataset ds;
  ds.name = std::move(name);
  std::string line;
  std::int64_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    auto f = split_tabs(line);
    if (f.size() != 4)
      throw format_error(path + " line " + std::to_string(lineno) +
                         ": expected a<TAB>b<TAB>c<TAB>d");
    if (f[0] == f[1] || f[0] == f[2] || f[1] == f[2])
      throw format_error(path + " line " + std::to_string(lineno) +
                         ": query words must be distinct");
    ds.rows.push_back(AnalogyRow{f[0], f[1], f[2], f[3]});
  }
  if (ds.rows.empty()) throw format_error(path + ": empty dataset");
  return ds;
}

RelationDataset read_relation(const std::string& path, std::string name) {
  auto in = open_or_throw(path);
  RelationDataset ds;
  ds.name = std::move(name);
  std::string line;
  std::int64_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    auto f = split_tabs(line);
    if (f.size() != 3)
      throw format_error(path + " line " + std::to_string(lineno) +
                         ": expected relation<TAB>word1<TAB>word2");
    ds.rows.push_back(RelationRow{f[0], f[1], f[2]});
  }
  if (ds.rows.size() < 2) throw format_error(path + ": need at least 2 rows");
  return ds;
}

namespace {

std::vector<TextRow> read_text_rows(const std::string& path) {
  auto in = open_or_throw(path);
  std::vector<TextRow> rows;
  std::string line;
  std::int64_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    auto tab = line.find('\t');
    if (tab == std::string::npos)
      throw format_error(path + " line " + std::to_string(lineno) +
                         ": expected label<TAB>tokens");
    std::string label = line.substr(0, tab);
    if (label != "0" && label != "1")
      throw format_error(path + " line " + std::to_string(lineno) +
                         ": label must be 0 or 1");
    TextRow row;
    row.label = label == "1" ? 1 : 0;
    std::istringstream ts(line.substr(tab + 1));
    std::string tok;
    while (ts >> tok) row.tokens.push_back(tok);
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace

TextDataset read_textclass(const std::string& train_path,
                           const std::string& test_path, std::string name) {
  TextDataset ds;
  ds.name = std::move(name);
  ds.train = read_text_rows(train_path);
  ds.test = read_text_rows(test_path);
  bool has0 = false, has1 = false;
  for (const auto& row : ds.train) (row.label == 0 ? has0 : has1) = true;
  if (!has0 || !has1)
    throw format_error(train_path + ": both classes must appear in train");
  return ds;
}

void write_report(const EvalReport& report, std::ostream& out) {
  out << report.dataset << '\t' << report.metric << '\t' << fmt(report.value)
      << '\t' << fmt(report.coverage) << '\n';
}

}  // namespace kway::eval
