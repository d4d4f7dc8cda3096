#include <random>
#include <set>

#include <gtest/gtest.h>

#include "sentcast/error.hpp"
#include "sentcast/models.hpp"
#include "sentcast/nn/network.hpp"
#include "temp_dir.hpp"

namespace sentcast {
namespace {

nn::Tensor random_input(const ModelSpec& spec, std::size_t batch, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> d(0.0, 1.0);
  std::vector<Sample> samples(batch);
  for (auto& s : samples) {
    s.features.resize(spec.input_features);
    for (double& f : s.features) f = d(rng);
  }
  return pack_inputs(spec, samples);
}

class CheckpointRoundTrip : public ::testing::TestWithParam<ModelKind> {};

TEST_P(CheckpointRoundTrip, ReloadPredictsBitIdentically) {
  const auto spec = ModelSpec::reference(GetParam());
  Model model = build(spec, 123);
  // Perturb away from the initializer so every parameter carries information.
  std::mt19937_64 rng(5);
  std::normal_distribution<double> d(0.0, 1e-3);
  for (auto& p : model.network.parameters()) {
    for (double& v : p.value->values()) v += d(rng);
  }
  const auto x = random_input(spec, 17, 9);
  const auto expected = model.network.forward(x, false);

  testing::TempDir dir;
  nn::save_checkpoint(model.network, dir.path() / "net.json");
  nn::Network loaded = nn::load_checkpoint(dir.path() / "net.json");
  EXPECT_EQ(loaded.forward(x, false), expected);
  EXPECT_EQ(loaded.parameter_count(), model.network.parameter_count());
  EXPECT_EQ(nn::serialize_checkpoint(loaded), nn::serialize_checkpoint(model.network));
}

INSTANTIATE_TEST_SUITE_P(Models, CheckpointRoundTrip,
                         ::testing::Values(ModelKind::mlp, ModelKind::lstm, ModelKind::finbert_lstm),
                         [](const auto& info) { return std::string(to_string(info.param)); });

TEST(Checkpoint, RejectsDamagedFiles) {
  EXPECT_THROW(nn::parse_checkpoint("{"), DataError);
  EXPECT_THROW(nn::parse_checkpoint(R"({"format":"other","version":1,"layers":[]})"), DataError);
  EXPECT_THROW(nn::parse_checkpoint(R"({"format":"sentcast-checkpoint","version":99,"layers":[]})"), DataError);
  const auto good = nn::serialize_checkpoint(build(ModelSpec::reference(ModelKind::mlp), 1).network);
  std::string truncated = good;
  // An extra value breaks the shape/value count agreement.
  const auto pos = truncated.find("\"values\"");
  ASSERT_NE(pos, std::string::npos);
  truncated.insert(truncated.find('[', pos) + 1, "1.0,");
  EXPECT_THROW(nn::parse_checkpoint(truncated), DataError);
}

TEST(Network, CopyIsDeep) {
  Model model = build(ModelSpec::reference(ModelKind::lstm), 4);
  nn::Network copy = model.network;
  const auto x = random_input(model.spec, 2, 1);
  const auto before = copy.forward(x, false);
  for (auto& p : model.network.parameters()) p.value->fill(0.0);
  EXPECT_EQ(copy.forward(x, false), before);
}

TEST(Network, ParameterNamesAreUnique) {
  Model model = build(ModelSpec::reference(ModelKind::lstm), 4);
  std::set<std::string> names;
  for (const auto& p : model.network.parameters()) names.insert(p.name);
  EXPECT_EQ(names.size(), model.network.parameters().size());
  EXPECT_TRUE(names.count("0.lstm.w_input") == 1) << *names.begin();
}

TEST(Network, InferenceIsDeterministic) {
  Model model = build(ModelSpec::reference(ModelKind::mlp), 8);
  const auto x = random_input(model.spec, 5, 2);
  EXPECT_EQ(model.network.forward(x, false), model.network.forward(x, false));
}

}  // namespace
}  // namespace sentcast
