#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "lodpg/config.hpp"
#include "lodpg/error.hpp"
#include "lodpg/experiments.hpp"

using namespace lodpg;
namespace fs = std::filesystem;

namespace {

ExperimentConfig parse(const std::string& text) {
  std::istringstream in(text);
  return ExperimentConfig::parse(in, "test.cfg");
}

std::string error_of(const std::string& text) {
  try {
    parse(text);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return {};
}

const char* kSmall = R"(
# small CG run
problem = elliptic-cg
n_fine = 16
n_coarse = 4
k = 0, 1/2, 1
methods = g-lod, pg-lod
coefficient = analytic
)";

}  // namespace

TEST(Config, ParsesListsAndOverrides) {
  const ExperimentConfig c = parse(R"(
problem = elliptic-cg
n_fine = 64
n_coarse = 4, 8, 16
k = 1
k.16 = 2, 6
methods = pg-lod
coefficient = constant
value = 2.5
rhs = 3
)");
  EXPECT_EQ(c.n_coarse, (std::vector<int>{4, 8, 16}));
  EXPECT_EQ(c.schedule(4), (std::vector<Layers>{Layers(1)}));
  EXPECT_EQ(c.schedule(16), (std::vector<Layers>{Layers(2), Layers(6)}));
  EXPECT_TRUE(c.has(Method::PgLod));
  EXPECT_FALSE(c.has(Method::GLod));
  EXPECT_EQ(c.coefficient.kind, CoefficientSpec::Kind::Constant);
  EXPECT_DOUBLE_EQ(c.source()(0.1, 0.9), 3.0);
  EXPECT_EQ(c.entries.size(), 9u);
}

TEST(Config, AutoLayers) {
  EXPECT_EQ(auto_layers(1.0 / 8, 10.0), Layers(2));
  EXPECT_EQ(auto_layers(1.0 / 16, 10.0), Layers(3));
  EXPECT_EQ(auto_layers(1.0 / 32, 10.0), Layers(4));
  EXPECT_EQ(auto_layers(1.0 / 8, std::exp(1.0)), Layers(5));
  const ExperimentConfig c = parse("problem = impes\nn_fine = 128\nn_coarse = 8, 16, 32\nk = auto\nbc = left-right\nbc_left = 1\n");
  EXPECT_EQ(c.schedule(8), (std::vector<Layers>{Layers(2)}));
  EXPECT_EQ(c.schedule(32), (std::vector<Layers>{Layers(4)}));
  EXPECT_DOUBLE_EQ(c.bc.value_of(Side::Left), 1.0);
  EXPECT_EQ(c.bc.kind_of(Side::Top), BoundaryKind::Neumann);
}

TEST(Config, ErrorsNameTheLine) {
  EXPECT_NE(error_of("n_fine = 16\nbogus = 1\n").find("test.cfg:2: unknown key 'bogus'"), std::string::npos);
  EXPECT_NE(error_of("n_fine = x\n").find("test.cfg:1:"), std::string::npos);
  EXPECT_NE(error_of("n_fine = 16\njust words\n").find("test.cfg:2:"), std::string::npos);
  EXPECT_NE(error_of("k = 1/0\n").find("bad layer count"), std::string::npos);
}

TEST(Config, ValidationFailures) {
  EXPECT_NE(error_of("n_fine = 64\nn_coarse = 6\n").find("does not divide"), std::string::npos);
  EXPECT_NE(error_of("n_fine = 16\nn_coarse = 8\n").find("ratio"), std::string::npos);
  EXPECT_NE(error_of("methods =\n").find("method list is empty"), std::string::npos);
  EXPECT_NE(error_of("k =\n").find("empty k schedule"), std::string::npos);
  EXPECT_NE(error_of("problem = elliptic-dg\nbc = left-right\nbc = dirichlet\nsigma = -1\n").find("sigma"),
            std::string::npos);
  EXPECT_NE(error_of("problem = impes\ncfl = 1.5\n").find("cfl"), std::string::npos);
  EXPECT_NE(error_of("coefficient = raster\n").find("raster path"), std::string::npos);
  EXPECT_THROW(ExperimentConfig::load("/nonexistent/run.cfg"), ConfigError);
}

TEST(Config, HashFollowsEntries) {
  const ExperimentConfig a = parse(kSmall);
  const ExperimentConfig b = parse(kSmall);
  const ExperimentConfig c = parse(std::string(kSmall) + "eps = 0.05\n");
  EXPECT_EQ(a.hash(), b.hash());
  EXPECT_NE(a.hash(), c.hash());
  EXPECT_EQ(csv_comment(a).rfind("# config ", 0), 0u);
}

TEST(Experiments, TableCsvIsDeterministic) {
  const ExperimentConfig c = parse(kSmall);
  std::ostringstream a, b;
  write_table_csv(a, c, run_convergence_table(c));
  write_table_csv(b, c, run_convergence_table(c));
  EXPECT_EQ(a.str(), b.str());
  std::istringstream in(a.str());
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, csv_comment(c));
  std::getline(in, line);
  EXPECT_EQ(line.rfind("H,k,", 0), 0u);
  int rows = 0;
  while (std::getline(in, line)) ++rows;
  EXPECT_EQ(rows, 3);
}

TEST(Experiments, SingleLayerDecayIsZero) {
  ExperimentConfig c = parse(kSmall);
  c.k = {Layers(1)};
  const DecayResult d = run_decay_plot(c);
  ASSERT_EQ(d.rows.size(), 1u);
  for (double v : d.rows[0].l2) EXPECT_EQ(v, 0.0);
  for (double v : d.rows[0].energy) EXPECT_EQ(v, 0.0);
}

TEST(Experiments, SnapshotRoundTrip) {
  const ExperimentConfig c = parse(kSmall);
  const fs::path dir = fs::temp_directory_path() / "lodpg_test_snapshots";
  fs::remove_all(dir);
  ImpesResult r;
  r.grid = UniformGrid(4);
  for (int i = 0; i < 3; ++i) {
    SaturationState s;
    s.t = 0.125 * i;
    for (int cell = 0; cell < 16; ++cell) s.s.push_back(std::sin(0.1 * cell + i) * 0.5 + 0.5);
    r.snapshots.push_back(s);
  }
  write_snapshots(dir, c, r);
  const ImpesResult back = read_snapshots(dir);
  EXPECT_EQ(back.grid.n(), 4);
  ASSERT_EQ(back.snapshots.size(), 3u);
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_NEAR(back.snapshots[i].t, r.snapshots[i].t, 1e-12);
    for (std::size_t k = 0; k < 16; ++k) EXPECT_NEAR(back.snapshots[i].s[k], r.snapshots[i].s[k], 1e-9);
  }
  fs::remove_all(dir);
}
