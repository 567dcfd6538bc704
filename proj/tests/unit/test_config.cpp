#include <gtest/gtest.h>

#include <fstream>
#include <sstream>
#include <string>

#include "disgen/config.hpp"
#include "disgen/error.hpp"
#include "json.hpp"
#include "test_support.hpp"

using namespace disgen;
using namespace disgen::testing;

namespace {

std::string config_error(const std::string& text) {
    try {
        parse_run_config(text);
    } catch (const ConfigError& e) {
        return e.what();
    }
    return {};
}

}  // namespace

TEST(Config, EmptyTextGivesDefaults) { EXPECT_EQ(parse_run_config(""), RunConfig{}); }

TEST(Config, DefaultsMatchDocumentedValues) {
    const RunConfig c;
    EXPECT_EQ(c.tau, 0.5);
    EXPECT_EQ(c.beta1, 0.5);
    EXPECT_EQ(c.beta2, 1.0);
    EXPECT_EQ(c.beta3, 5e4);
    EXPECT_EQ(c.k1_fraction, 0.2);
    EXPECT_EQ(c.k2_fraction, 0.2);
    EXPECT_EQ(c.epsilon, 1e-8);
    EXPECT_EQ(c.seeds.size(), 5u);
}

TEST(Config, ParsesValuesCommentsAndLists) {
    const RunConfig c = parse_run_config(
        "# comment line\n"
        "backbone = GIN\n"
        "hidden = 32   # trailing\n"
        "  beta3=1e3\n"
        "warm_start = true\n"
        "split_ratios = 80, 10, 10\n"
        "upsample = 1:3, 0:2\n"
        "seeds = 7,8\n"
        "dataset_name = PROTEINS\n");
    EXPECT_EQ(c.backbone, BackboneKind::GIN);
    EXPECT_EQ(c.hidden, 32u);
    EXPECT_EQ(c.beta3, 1e3);
    EXPECT_TRUE(c.warm_start);
    EXPECT_EQ(c.split.train, 80.0);
    EXPECT_EQ(c.split.test, 10.0);
    ASSERT_EQ(c.upsample.size(), 2u);
    EXPECT_EQ(c.upsample[0], std::make_pair(std::size_t{1}, std::size_t{3}));
    EXPECT_EQ(c.seeds, (std::vector<std::uint64_t>{7, 8}));
    EXPECT_EQ(c.dataset_name, "PROTEINS");
}

TEST(Config, RejectsBadInputWithLineNumber) {
    EXPECT_NE(config_error("hidden = 4\nfoo = 1\n").find("line 2"), std::string::npos);
    EXPECT_NE(config_error("foo = 1\n").find("unknown key 'foo'"), std::string::npos);
    EXPECT_NE(config_error("tau = 1\ntau = 2\n").find("duplicate"), std::string::npos);
    EXPECT_NE(config_error("hidden\n").find("line 1"), std::string::npos);
    EXPECT_FALSE(config_error("hidden = -3\n").empty());
    EXPECT_FALSE(config_error("hidden = 3.5\n").empty());
    EXPECT_FALSE(config_error("tau = abc\n").empty());
    EXPECT_FALSE(config_error("tau = inf\n").empty());
    EXPECT_FALSE(config_error("tau = 0\n").empty());
    EXPECT_FALSE(config_error("epsilon = 0\n").empty());
    EXPECT_FALSE(config_error("k1_fraction = 1.5\n").empty());
    EXPECT_FALSE(config_error("backbone = GAT\n").empty());
    EXPECT_FALSE(config_error("warm_start = maybe\n").empty());
    EXPECT_FALSE(config_error("split_ratios = 1,2\n").empty());
    EXPECT_FALSE(config_error("upsample = 1-3\n").empty());
    EXPECT_FALSE(config_error("upsample = 1:0\n").empty());
}

TEST(Config, TextRoundTrip) {
    RunConfig c;
    c.backbone = BackboneKind::GIN;
    c.beta3 = 0.1 + 0.2;
    c.learning_rate = 3e-4;
    c.upsample = {{1, 4}};
    c.seeds = {11};
    c.dataset_path = "/data/x";
    c.split = {60, 20, 20};
    EXPECT_EQ(parse_run_config(to_config_text(c)), c);
    EXPECT_EQ(parse_run_config(to_config_text(RunConfig{})), RunConfig{});
}

TEST(Config, LoadFromFile) {
    const auto path = scratch_dir("config") / "run.cfg";
    std::ofstream(path) << "hidden = 12\n";
    EXPECT_EQ(load_run_config(path).hidden, 12u);
    EXPECT_THROW(load_run_config(path.parent_path() / "absent.cfg"), ConfigError);
}

TEST(Config, HashIgnoresSeedOnly) {
    RunConfig a;
    RunConfig b = a;
    b.seed = 99;
    EXPECT_EQ(config_hash(a), config_hash(b));
    b.beta1 = 0.25;
    EXPECT_NE(config_hash(a), config_hash(b));
    RunConfig c = a;
    c.hidden = 65;
    EXPECT_NE(config_hash(a), config_hash(c));
}

TEST(Config, JsonHasEveryKey) {
    const auto j = nlohmann::json::parse(to_config_json(RunConfig{}));
    std::istringstream text(to_config_text(RunConfig{}));
    std::string line;
    while (std::getline(text, line)) {
        const std::string key = line.substr(0, line.find(' '));
        EXPECT_TRUE(j.contains(key)) << key;
    }
    EXPECT_EQ(j.at("config_hash").get<std::string>(), std::to_string(config_hash(RunConfig{})));
    EXPECT_EQ(j.at("beta3").get<double>(), 5e4);
    EXPECT_EQ(j.at("backbone").get<std::string>(), "GCN");
}
