#include "kway/eval.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "kway/error.hpp"

using namespace kway;
using doctest::Approx;
using eval::AnalogyDataset;
using eval::RelationDataset;
using eval::SimilarityDataset;
using eval::TextDataset;
using trainer::EmbeddingModel;

namespace {

EmbeddingModel model_of(std::vector<std::string> words,
                        std::vector<std::vector<double>> rows) {
  EmbeddingModel m;
  m.words = std::move(words);
  m.vectors = Matrix(static_cast<std::int64_t>(rows.size()),
                     static_cast<std::int64_t>(rows.front().size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    std::copy(rows[i].begin(), rows[i].end(),
              m.vectors.row(static_cast<std::int64_t>(i)).begin());
  return m;
}

}  // namespace

TEST_CASE("cosine") {
  std::vector<double> ex{1, 0}, ey{0, 1}, diag{1, 1}, zero{0, 0};
  CHECK(eval::cosine(ex, ey) == 0.0);
  CHECK(eval::cosine(diag, diag) == Approx(1.0));
  CHECK(eval::cosine(ex, diag) == Approx(1.0 / std::sqrt(2.0)).epsilon(1e-9));
  CHECK(eval::cosine(zero, diag) == 0.0);
  std::vector<double> three{1, 2, 3};
  CHECK_THROWS_AS(eval::cosine(ex, three), std::invalid_argument);
}

TEST_CASE("similarity evaluation") {
  // Cosines with 'probe' order the pairs exactly like the ratings.
  auto m = model_of({"probe", "near", "mid", "far"},
                    {{1, 0}, {0.9, 0.1}, {0.5, 0.5}, {0.0, 1.0}});
  SimilarityDataset ds;
  ds.name = "toy";
  ds.rows = {{"probe", "near", 9.0}, {"probe", "mid", 5.0}, {"probe", "far", 1.0}};
  auto report = eval::eval_similarity(m, ds);
  CHECK(report.value == Approx(1.0));
  CHECK(report.coverage == Approx(1.0));
  CHECK(report.metric == "spearman");

  SUBCASE("OOV rows count against coverage") {
    ds.rows.push_back({"probe", "unknown", 3.0});
    auto r = eval::eval_similarity(m, ds);
    CHECK(r.coverage == Approx(0.75));
    CHECK(r.value == Approx(1.0));
  }
  SUBCASE("all rows OOV is an error naming the dataset") {
    SimilarityDataset bad;
    bad.name = "ghost";
    bad.rows = {{"x", "y", 1.0}};
    try {
      eval::eval_similarity(m, bad);
      FAIL("expected error");
    } catch (const std::invalid_argument& e) {
      CHECK(std::string(e.what()).find("ghost") != std::string::npos);
    }
  }
  SUBCASE("rho is invariant under uniform scaling of the embeddings") {
    auto scaled = m;
    for (auto& v : scaled.vectors.data) v *= 17.5;
    CHECK(eval::eval_similarity(scaled, ds).value ==
          Approx(eval::eval_similarity(m, ds).value));
  }
}

TEST_CASE("analogy with CosAdd") {
  double s = 1.0 / std::sqrt(3.0);
  auto m = model_of({"a", "b", "c", "t"},
                    {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}, {-s, s, s}});
  AnalogyDataset ds;
  ds.name = "toy";
  ds.rows = {{"a", "b", "c", "t"}};
  auto report = eval::eval_analogy_cosadd(m, ds);
  CHECK(report.value == Approx(1.0));
  CHECK(report.coverage == Approx(1.0));

  SUBCASE("scaling invariance") {
    auto scaled = m;
    for (auto& v : scaled.vectors.data) v *= 0.03;
    CHECK(eval::eval_analogy_cosadd(scaled, ds).value == Approx(1.0));
  }
  SUBCASE("gold inside the query triple is unanswerable") {
    ds.rows.push_back({"a", "b", "c", "b"});
    auto r = eval::eval_analogy_cosadd(m, ds);
    CHECK(r.value == Approx(1.0));  // unanswerable row leaves the denominator
    CHECK(r.coverage == Approx(1.0));
    CHECK(r.notes.find("unanswerable") != std::string::npos);
  }
  SUBCASE("OOV gold drops the row") {
    AnalogyDataset oov;
    oov.name = "toy";
    oov.rows = {{"a", "b", "c", "zzz"}, {"a", "b", "c", "t"}};
    auto r = eval::eval_analogy_cosadd(m, oov);
    CHECK(r.coverage == Approx(0.5));
    CHECK(r.value == Approx(1.0));
  }
}

TEST_CASE("relation classification with offset 1-NN") {
  auto m = model_of({"king", "queen", "man", "woman", "paris", "france"},
                    {{1, 1}, {1, 0}, {2, 1}, {2, 0}, {0, 1}, {1, 1}});
  RelationDataset ds;
  ds.name = "toy";
  ds.rows = {{"r1", "king", "queen"},
             {"r1", "man", "woman"},
             {"r2", "paris", "france"}};
  auto report = eval::eval_relation_diffvec(m, ds);
  CHECK(report.value == Approx(2.0 / 3.0));

  SUBCASE("identical rows of one relation are perfect") {
    RelationDataset dup;
    dup.name = "dup";
    dup.rows = {{"r", "king", "queen"}, {"r", "king", "queen"}};
    CHECK(eval::eval_relation_diffvec(m, dup).value == Approx(1.0));
  }
  SUBCASE("a singleton relation is necessarily wrong") {
    RelationDataset lone;
    lone.name = "lone";
    lone.rows = {{"r1", "king", "queen"}, {"r1", "man", "woman"},
                 {"solo", "king", "man"}};
    auto r = eval::eval_relation_diffvec(m, lone);
    CHECK(r.value == Approx(2.0 / 3.0));
  }
  SUBCASE("fewer than two usable rows is an error") {
    RelationDataset thin;
    thin.name = "thin";
    thin.rows = {{"r1", "king", "zzz"}, {"r1", "man", "woman"}};
    CHECK_THROWS_AS(eval::eval_relation_diffvec(m, thin), std::invalid_argument);
  }
}

TEST_CASE("centroid semantics") {
  auto m = model_of({"u", "v"}, {{1, 0}, {0, 1}});
  std::vector<std::string> one{"u"};
  CHECK(*eval::centroid(m, one) == std::vector<double>{1, 0});
  std::vector<std::string> two{"u", "v"};
  CHECK(*eval::centroid(m, two) == std::vector<double>{0.5, 0.5});
  std::vector<std::string> multi{"u", "u", "v"};
  auto c = *eval::centroid(m, multi);
  CHECK(c[0] == Approx(2.0 / 3.0));
  CHECK(c[1] == Approx(1.0 / 3.0));
  std::vector<std::string> oov{"zzz"};
  CHECK_FALSE(eval::centroid(m, oov).has_value());
}

TEST_CASE("logistic regression") {
  std::vector<std::vector<double>> x{{-1.0}, {1.0}};
  std::vector<int> y{0, 1};
  auto clf = eval::train_logreg(x, y);
  CHECK(eval::logreg_probability(clf, x[0]) < 0.5);
  CHECK(eval::logreg_probability(clf, x[1]) > 0.5);

  SUBCASE("zero weights predict one half") {
    eval::LogRegModel zero;
    zero.weights = {0.0};
    std::vector<double> any{42.0};
    CHECK(eval::logreg_probability(zero, any) == Approx(0.5));
  }
  SUBCASE("loss decreases every epoch on a fixed instance") {
    std::vector<std::vector<double>> fx{{-2.0, 1.0}, {-0.5, -1.0}, {0.5, 0.3}, {2.0, -0.2}};
    std::vector<int> fy{0, 0, 1, 1};
    double prev = eval::logreg_mean_loss(eval::LogRegModel{{0.0, 0.0}, 0.0}, fx, fy);
    for (int e = 1; e <= 50; ++e) {
      auto m = eval::train_logreg(fx, fy, e, 0.1);
      double loss = eval::logreg_mean_loss(m, fx, fy);
      CHECK(loss < prev);
      prev = loss;
    }
  }
  SUBCASE("single-class input is rejected") {
    std::vector<int> ones{1, 1};
    CHECK_THROWS_AS(eval::train_logreg(x, ones), std::invalid_argument);
  }
}

TEST_CASE("text classification end to end") {
  auto m = model_of({"neg2", "neg1", "pos1", "pos2", "zero"},
                    {{-2}, {-1}, {1}, {2}, {0}});
  TextDataset ds;
  ds.name = "toy";
  ds.train = {{0, {"neg2"}}, {0, {"neg1"}}, {1, {"pos1"}}, {1, {"pos2"}}};
  // Symmetric training keeps the intercept at exactly zero, so the sign of
  // the centroid decides; the zero centroid sits on the boundary and the
  // >= 0.5 rule maps it to label 1.
  ds.test = {{0, {"neg2", "neg1"}},
             {1, {"pos1", "pos2"}},
             {0, {"neg1"}},
             {1, {"pos2"}},
             {0, {"zero"}}};
  auto report = eval::eval_textclass(m, ds);
  CHECK(report.value == Approx(4.0 / 5.0));
  CHECK(report.coverage == Approx(1.0));

  SUBCASE("separable identical train and test reach accuracy 1") {
    TextDataset easy;
    easy.name = "easy";
    easy.train = {{0, {"neg2"}}, {1, {"pos2"}}};
    easy.test = easy.train;
    CHECK(eval::eval_textclass(m, easy).value == Approx(1.0));
  }
  SUBCASE("all-OOV rows count against coverage") {
    TextDataset holey = ds;
    holey.test.push_back({1, {"martian"}});
    auto r = eval::eval_textclass(m, holey);
    CHECK(r.coverage == Approx(9.0 / 10.0));
  }
  SUBCASE("empty usable train split is an error") {
    TextDataset bad;
    bad.name = "bad";
    bad.train = {{0, {"martian"}}, {1, {"venusian"}}};
    bad.test = {{0, {"neg1"}}};
    CHECK_THROWS_AS(eval::eval_textclass(m, bad), std::invalid_argument);
  }
}

TEST_CASE("rating normalization") {
  SimilarityDataset ds;
  ds.name = "n";
  ds.rows = {{"a", "b", 2.0}, {"c", "d", 4.0}, {"e", "f", 6.0}};
  auto out = eval::normalize_ratings(ds);
  CHECK(out.rows[0].rating == Approx(0.0));
  CHECK(out.rows[1].rating == Approx(0.5));
  CHECK(out.rows[2].rating == Approx(1.0));

  SimilarityDataset frac;
  frac.name = "f";
  frac.rows = {{"a", "b", 1.0}, {"c", "d", 2.0}, {"e", "f", 4.0}};
  auto fo = eval::normalize_ratings(frac);
  CHECK(fo.rows[1].rating == Approx(1.0 / 3.0));

  SimilarityDataset flat;
  flat.name = "flat";
  flat.rows = {{"a", "b", 3.0}, {"c", "d", 3.0}};
  for (const auto& row : eval::normalize_ratings(flat).rows)
    CHECK(row.rating == Approx(0.5));
}

TEST_CASE("divergence report") {
  auto base = model_of({"a", "b", "c", "d", "e", "f"},
                       {{1, 0},   {0.9, 0.1}, {0.5, 0.5},
                        {0.2, 0.9}, {0, 1},   {0.7, 0.3}});
  SimilarityDataset pooled;
  pooled.name = "pooled";
  pooled.rows = {{"a", "b", 0.9}, {"a", "c", 0.5}, {"b", "d", 0.4},
                 {"c", "e", 0.6}, {"d", "f", 0.3}, {"e", "f", 0.2}};

  SUBCASE("identical models select nothing") {
    CHECK(eval::divergence_report(base, base, pooled).empty());
  }

  SUBCASE("a planted outlier pair is selected first and symmetrically") {
    auto other = base;
    // Flip 'b' so the (a,b) score moves far from every other change.
    other.vectors.row(1)[0] = -0.9;
    other.vectors.row(1)[1] = -0.1;
    auto ab = eval::divergence_report(base, other, pooled);
    REQUIRE(!ab.empty());
    CHECK(((ab[0].word1 == "a" && ab[0].word2 == "b") ||
           (ab[0].word1 == "b" && ab[0].word2 == "d")));
    auto ba = eval::divergence_report(other, base, pooled);
    REQUIRE(ba.size() == ab.size());
    for (std::size_t i = 0; i < ab.size(); ++i) {
      CHECK(ab[i].word1 == ba[i].word1);
      CHECK(ab[i].difference == Approx(-ba[i].difference));
    }
  }

  SUBCASE("insufficient shared coverage is an error") {
    SimilarityDataset thin;
    thin.name = "thin";
    thin.rows = {{"a", "zzz", 0.5}, {"a", "b", 0.6}};
    CHECK_THROWS_AS(eval::divergence_report(base, base, thin),
                    std::invalid_argument);
  }
}

TEST_CASE("dataset readers validate their schemas") {
  auto dir = std::filesystem::temp_directory_path() / "kway_eval_test";
  std::filesystem::create_directories(dir);
  auto write = [&](const std::string& name, const std::string& body) {
    std::ofstream out(dir / name);
    out << body;
    return (dir / name).string();
  };

  auto sim = eval::read_similarity(write("s.tsv", "cat\tdog\t7.5\nup\tdown\t1\n"), "s");
  REQUIRE(sim.rows.size() == 2);
  CHECK(sim.rows[0].rating == Approx(7.5));
  CHECK_THROWS_AS(eval::read_similarity(write("bad.tsv", "a\tb\n"), "bad"),
                  format_error);
  CHECK_THROWS_AS(eval::read_similarity(write("nan.tsv", "a\tb\tnan\n"), "nan"),
                  format_error);
  CHECK_THROWS_AS(eval::read_similarity(write("empty.tsv", ""), "e"), format_error);

  auto ana = eval::read_analogy(write("a.tsv", "a\tb\tc\td\n"), "a");
  CHECK(ana.rows.size() == 1);
  CHECK_THROWS_AS(eval::read_analogy(write("adup.tsv", "a\ta\tc\td\n"), "adup"),
                  format_error);

  auto rel = eval::read_relation(write("r.tsv", "r1\tx\ty\nr2\tp\tq\n"), "r");
  CHECK(rel.rows.size() == 2);
  CHECK_THROWS_AS(eval::read_relation(write("rthin.tsv", "r1\tx\ty\n"), "rthin"),
                  format_error);

  auto text = eval::read_textclass(write("tr.tsv", "0\tbad film\n1\tgreat film\n"),
                                   write("te.tsv", "1\tfine movie\n"), "t");
  CHECK(text.train.size() == 2);
  CHECK(text.test.size() == 1);
  CHECK(text.train[0].tokens == std::vector<std::string>{"bad", "film"});
  CHECK_THROWS_AS(
      eval::read_textclass(write("tr1.tsv", "1\tgreat\n"), write("te.tsv", ""), "t1"),
      format_error);
  CHECK_THROWS_AS(
      eval::read_textclass(write("trx.tsv", "2\tgreat\n"), write("te.tsv", ""), "tx"),
      format_error);
}
