#include "auraseg/errors.hpp"
#include "auraseg/key_value.hpp"
#include "auraseg/run_config.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

using namespace auraseg;

TEST(KeyValue, ParsesCommentsListsAndWhitespace) {
  const auto doc = KeyValueDocument::parse(
      "# comment\n"
      "model.use_aspp = false\n"
      "  model.aspp_dilations=1, 6 ,12  \n"
      "\n"
      "loss.alpha = 0.3\n");
  EXPECT_EQ(doc.get_bool("model.use_aspp"), false);
  EXPECT_EQ(doc.get_int_list("model.aspp_dilations"), (std::vector<int>{1, 6, 12}));
  EXPECT_DOUBLE_EQ(*doc.get_real("loss.alpha"), 0.3);
  EXPECT_FALSE(doc.get_int("missing").has_value());
}

TEST(KeyValue, TypeErrorsNameKeyAndType) {
  const auto doc = KeyValueDocument::parse("trainer.batch_size = four\nmodel.use_rbrm = maybe\n");
  try {
    doc.get_int("trainer.batch_size");
    FAIL();
  } catch (const ConfigError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("trainer.batch_size"), std::string::npos);
    EXPECT_NE(msg.find("int"), std::string::npos);
  }
  EXPECT_THROW(doc.get_bool("model.use_rbrm"), ConfigError);
}

TEST(KeyValue, MalformedLineIsRejected) {
  EXPECT_THROW(KeyValueDocument::parse("model.use_aspp\n"), FormatError);
}

TEST(KeyValue, OverrideReplacesValue) {
  auto doc = KeyValueDocument::parse("trainer.lr = 0.001\n");
  doc.apply_override("trainer.lr=0.01");
  EXPECT_DOUBLE_EQ(*doc.get_real("trainer.lr"), 0.01);
  EXPECT_THROW(doc.apply_override("novalue"), ConfigError);
}

TEST(KeyValue, RealsRoundTripExactly) {
  for (double v : {0.1, 1e-6, 0.485, 1.0 / 3.0, 12345.678901234567}) {
    auto doc = KeyValueDocument::parse("x = " + format_real(v) + "\n");
    EXPECT_EQ(*doc.get_real("x"), v);
  }
}

TEST(RunConfig, SerializationRoundTripsFieldForField) {
  RunConfig cfg;
  cfg.model.use_rbrm = false;
  cfg.model.aspp_dilations = {2, 4, 8, 16};
  cfg.model.input_height = 96;
  cfg.model.input_width = 160;
  cfg.loss.aux_weight = 0.4;
  cfg.loss.gamma = 1.5;
  cfg.trainer.lr = 3e-4;
  cfg.trainer.seed = 17;
  cfg.trainer.precision = Precision::Float64;
  cfg.data.source = "manifest";
  cfg.data.root = "/data/gmrp";
  cfg.data.mean = {0.1, 0.2, 0.3};
  cfg.data.shuffle_seed = 99;
  const RunConfig back = parse_run_config(serialize(cfg));
  EXPECT_TRUE(back == cfg);
  EXPECT_TRUE(back.model == cfg.model);
  EXPECT_TRUE(parse_run_config(serialize(RunConfig{})) == RunConfig{});
}

TEST(RunConfig, UnknownKeyIsRejected) {
  EXPECT_THROW(parse_run_config("model.use_asp = true\n"), ConfigError);
}

TEST(RunConfig, InputSizeNeedsTwoValues) {
  EXPECT_THROW(parse_run_config("model.input_size = 64\n"), ConfigError);
  const auto cfg = parse_run_config("model.input_size = 64,96\n");
  EXPECT_EQ(cfg.model.input_height, 64);
  EXPECT_EQ(cfg.model.input_width, 96);
}

TEST(RunConfig, RejectsBadSourceAndNegativeSeed) {
  EXPECT_THROW(parse_run_config("data.source = folder\n"), ConfigError);
  EXPECT_THROW(parse_run_config("trainer.seed = -1\n"), ConfigError);
  EXPECT_THROW(parse_run_config("data.mean = 0.5,0.5\n"), ConfigError);
}

TEST(RunConfig, LoadFileThenOverrides) {
  const auto dir = std::filesystem::temp_directory_path() / "auraseg_cfg_test";
  std::filesystem::create_directories(dir);
  const auto path = dir / "run.cfg";
  {
    std::ofstream f(path);
    f << "trainer.lr = 0.001\nmodel.input_size = 64,64\n";
  }
  const auto cfg = load_run_config(path, {"trainer.lr=0.01", "model.use_rbrm=false"});
  EXPECT_DOUBLE_EQ(cfg.trainer.lr, 0.01);
  EXPECT_FALSE(cfg.model.use_rbrm);
  EXPECT_EQ(cfg.model.input_height, 64);
  EXPECT_THROW(load_run_config(dir / "absent.cfg"), IoError);
}

TEST(RunConfig, EveryKeyIsWritten) {
  const auto doc = to_document(RunConfig{});
  for (const auto& key : known_config_keys()) EXPECT_TRUE(doc.contains(key)) << key;
  EXPECT_EQ(doc.entries().size(), known_config_keys().size());
}
