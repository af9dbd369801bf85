#include <cstring>
#include <random>

#include "doctest.h"
#include "onebit/baselines.hpp"
#include "onebit/persistence.hpp"
#include "scratch_dir.hpp"

using namespace onebit;
namespace fs = std::filesystem;
using cd = std::complex<double>;

namespace {

PairedDataset tiny_data(int count = 30, std::uint64_t seed = 9) {
  SystemConfig sys;
  sys.antennas = 16;
  sys.users = 8;
  sys.pilot_length = 4;
  sys.seed = seed;
  return PairedDataset::generate(sys, count);
}

TrainConfig one_epoch() {
  TrainConfig c;
  c.epochs = 2;
  c.seed = 1;
  return c;
}

void flip_byte(const fs::path& path, std::size_t offset_from_end) {
  std::string bytes = read_file(path);
  bytes[bytes.size() - offset_from_end] ^= 0x01;
  write_file(path, bytes, true);
}

}  // namespace

TEST_CASE("sha256") {
  CHECK(sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("array files round trip") {
  Rng rng(1);
  std::normal_distribution<double> d(0, 1);
  std::vector<ChannelMatrix> hs;
  for (int n = 0; n < 3; ++n) {
    ChannelMatrix h(5, 2);
    for (Eigen::Index i = 0; i < h.size(); ++i) h.data()[i] = cd(d(rng), d(rng));
    hs.push_back(h);
  }
  const std::string bytes = encode_array(channels_to_blob(hs));
  CHECK(bytes.substr(0, 8) == std::string("OBARRAY\0", 8));
  const auto blob = decode_array(bytes);
  CHECK(blob.shape == std::vector<std::uint64_t>{3, 5, 2});
  CHECK(blob_to_channels(blob) == hs);
  // row-major: element [1, 2, 1] sits at (1*5 + 2)*2 + 1
  cd v;
  std::memcpy(&v, blob.data.data() + ((1 * 5 + 2) * 2 + 1) * sizeof(cd), sizeof(cd));
  CHECK(v == hs[1](2, 1));

  CHECK(blob_to_matrix(decode_array(encode_array(matrix_to_blob(hs[0])))) == hs[0]);
  CHECK(blob_to_channels(decode_array(encode_array(channels_to_blob({})))).empty());

  CHECK_THROWS_AS(decode_array(bytes.substr(0, bytes.size() - 1)), PersistenceError);
  CHECK_THROWS_AS(decode_array("NOTARRAY"), PersistenceError);
  std::string bad_version = bytes;
  bad_version[8] = 7;
  CHECK_THROWS_WITH_AS(decode_array(bad_version), doctest::Contains("version"), PersistenceError);
  CHECK_THROWS_AS(blob_to_matrix(blob), PersistenceError);
}

TEST_CASE("file writes refuse to overwrite") {
  ScratchDir dir("write");
  const fs::path p = dir / "nested/a.txt";
  write_file(p, "one", false);
  CHECK(read_file(p) == "one");
  CHECK_THROWS_WITH_AS(write_file(p, "two", false), doctest::Contains("--overwrite"), PersistenceError);
  CHECK(read_file(p) == "one");
  write_file(p, "two", true);
  CHECK(read_file(p) == "two");
  CHECK_THROWS_AS(read_file(dir / "missing"), PersistenceError);
}

TEST_CASE("datasets round trip and validate") {
  ScratchDir dir("dataset");
  const PairedDataset data = tiny_data();
  const auto m = save_dataset(data, dir / "d", false);
  CHECK(m.count == 30);
  CHECK(m.ratios.train + m.ratios.test + m.ratios.validation == doctest::Approx(1.0));
  CHECK(m.digests.size() == 2);

  const PairedDataset back = load_dataset(dir / "d");
  CHECK(back.channels == data.channels);
  CHECK(back.pilots == data.pilots);
  CHECK(back.system.seed == data.system.seed);
  CHECK(back.observation(4, 3.0) == data.observation(4, 3.0));
  CHECK(read_manifest(dir / "d").to_json() == m.to_json());

  SUBCASE("identical regeneration gives identical digests") {
    const auto again = save_dataset(tiny_data(), dir / "e", false);
    CHECK(again.digests == m.digests);
    CHECK(read_file(dir / "e/manifest.json") == read_file(dir / "d/manifest.json"));
    const auto other = save_dataset(tiny_data(30, 10), dir / "f", false);
    CHECK(other.digests != m.digests);
  }
  SUBCASE("existing directories need overwrite") {
    CHECK_THROWS_WITH_AS(save_dataset(data, dir / "d", false), doctest::Contains("--overwrite"), PersistenceError);
    CHECK_NOTHROW(save_dataset(data, dir / "d", true));
  }
  SUBCASE("corrupted payloads fail with a digest mismatch") {
    flip_byte(dir / "d/channels.oba", 5);
    CHECK_THROWS_WITH_AS(load_dataset(dir / "d"), doctest::Contains("digest mismatch"), PersistenceError);
  }
  SUBCASE("bad manifests are rejected") {
    std::string j = read_file(dir / "d/manifest.json");
    auto pos = j.find("\"train\": 0.5");
    REQUIRE(pos != std::string::npos);
    j.replace(pos, 12, "\"train\": 0.6");
    write_file(dir / "d/manifest.json", j, true);
    CHECK_THROWS_WITH_AS(load_dataset(dir / "d"), doctest::Contains("sum to 1"), PersistenceError);
    CHECK_THROWS_AS(load_dataset(dir / "nowhere"), PersistenceError);
  }
}

TEST_CASE("checkpoints reproduce estimates bit-exactly") {
  ScratchDir dir("ckpt");
  const PairedDataset data = tiny_data();
  GeneratorSpec g;
  g.base_filters = 4;
  DiscriminatorSpec d;
  d.filters = 4;
  MlpSpec mspec;
  mspec.hidden = 16;

  std::vector<TrainedEstimator> models;
  models.push_back(train_cgan(data, g, d, one_epoch()));
  models.push_back(train_unet_l2(data, g, one_epoch()));
  models.push_back(train_cnn(data, g, one_epoch()));
  models.push_back(train_mlp(data, mspec, one_epoch()));

  std::vector<QuantizedObservation> ys;
  for (int i = 0; i < 5; ++i) ys.push_back(data.observation(i, 0.0));

  for (const auto& model : models) {
    CAPTURE(model.name());
    const fs::path p = dir / (model.name() + ".ckpt");
    save_checkpoint(model, p, false);
    const TrainedEstimator back = load_checkpoint(p);
    CHECK(back.descriptor().kind == model.descriptor().kind);
    CHECK(back.descriptor().dims == model.descriptor().dims);
    CHECK(back.descriptor().generator == model.descriptor().generator);
    CHECK(back.scale().value == model.scale().value);
    CHECK(back.metadata().history.size() == model.metadata().history.size());
    CHECK(back.metadata().selected_epoch == model.metadata().selected_epoch);
    CHECK(back.metadata().config_hash == model.metadata().config_hash);
    CHECK(back.discriminator_weights().has_value() == model.discriminator_weights().has_value());
    for (const auto& y : ys) CHECK(back.estimate(y, data.pilots) == model.estimate(y, data.pilots));
    CHECK(back.estimate_all(ys, data.pilots, 0) == model.estimate_all(ys, data.pilots, 0));
    CHECK(encode_checkpoint(back) == encode_checkpoint(model));
    CHECK_THROWS_AS(save_checkpoint(model, p, false), PersistenceError);
  }

  SUBCASE("corruption is detected") {
    const fs::path p = dir / "cgan.ckpt";
    flip_byte(p, 200);
    CHECK_THROWS_WITH_AS(load_checkpoint(p), doctest::Contains("digest mismatch"), PersistenceError);
    std::string bytes = read_file(dir / "unet.ckpt");
    CHECK_THROWS_AS(decode_checkpoint(bytes.substr(0, bytes.size() / 2)), PersistenceError);
    CHECK_THROWS_AS(decode_checkpoint("garbage"), PersistenceError);
  }
  SUBCASE("missing files name the path") {
    CHECK_THROWS_WITH_AS(load_checkpoint(dir / "nope.ckpt"), doctest::Contains("nope.ckpt"), PersistenceError);
  }
}

TEST_CASE("system config json round trip") {
  SystemConfig s;
  s.antennas = 128;
  s.users = 16;
  s.paths = 3;
  s.seed = 123456789012345ULL;
  s.antenna_spacing_m = 0.05;
  s.delay_spread_s = 1.5e-8;
  const SystemConfig back = system_config_from_json(system_config_json(s));
  CHECK(back.antennas == 128);
  CHECK(back.users == 16);
  CHECK(back.paths == 3);
  CHECK(back.seed == s.seed);
  CHECK(back.antenna_spacing_m == s.antenna_spacing_m);
  CHECK(back.delay_spread_s == s.delay_spread_s);
  CHECK_FALSE(system_config_from_json(system_config_json(SystemConfig{})).antenna_spacing_m.has_value());
}

TEST_CASE("history table has one row per epoch") {
  TrainingMetadata m;
  for (int e = 1; e <= 3; ++e) m.history.push_back({e, 0.1, 0.2, -0.3, 0.4, -1.0, -0.9, 0.9});
  const std::string t = history_table(m);
  CHECK(std::count(t.begin(), t.end(), '\n') == 4);
}
