#include "disgen/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

#include "disgen/error.hpp"
#include "disgen/rng.hpp"
#include "disgen/tu_format.hpp"
#include "json.hpp"

namespace disgen {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& text) {
    std::vector<std::string> out;
    if (trim(text).empty()) return out;
    std::stringstream in(text);
    std::string item;
    while (std::getline(in, item, ',')) out.push_back(trim(item));
    return out;
}

std::size_t to_count(const std::string& key, const std::string& v) {
    std::size_t out = 0;
    const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || p != v.data() + v.size()) {
        throw ConfigError(key + ": expected a non-negative integer, got '" + v + "'");
    }
    return out;
}

double to_real(const std::string& key, const std::string& v) {
    double out = 0.0;
    const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || p != v.data() + v.size() || !std::isfinite(out)) {
        throw ConfigError(key + ": expected a finite real, got '" + v + "'");
    }
    return out;
}

bool to_bool(const std::string& key, const std::string& v) {
    if (v == "true" || v == "1") return true;
    if (v == "false" || v == "0") return false;
    throw ConfigError(key + ": expected true or false, got '" + v + "'");
}

BackboneKind to_kind(const std::string& key, const std::string& v) {
    try {
        return parse_backbone_kind(v);
    } catch (const ConfigError&) {
        throw ConfigError(key + ": expected GCN or GIN, got '" + v + "'");
    }
}

struct Field {
    const char* key;
    std::function<std::string(const RunConfig&)> get;
    std::function<void(RunConfig&, const std::string&)> set;
};

template <typename T>
Field count_field(const char* key, T RunConfig::*member) {
    return {key, [member](const RunConfig& c) { return std::to_string(c.*member); },
            [key, member](RunConfig& c, const std::string& v) { c.*member = static_cast<T>(to_count(key, v)); }};
}

Field real_field(const char* key, double RunConfig::*member) {
    return {key, [member](const RunConfig& c) { return format_real(c.*member); },
            [key, member](RunConfig& c, const std::string& v) { c.*member = to_real(key, v); }};
}

Field kind_field(const char* key, BackboneKind RunConfig::*member) {
    return {key, [member](const RunConfig& c) { return to_string(c.*member); },
            [key, member](RunConfig& c, const std::string& v) { c.*member = to_kind(key, v); }};
}

Field text_field(const char* key, std::string RunConfig::*member) {
    return {key, [member](const RunConfig& c) { return c.*member; },
            [member](RunConfig& c, const std::string& v) { c.*member = v; }};
}

const std::vector<Field>& schema() {
    static const std::vector<Field> fields = {
        kind_field("backbone", &RunConfig::backbone),
        count_field("layers", &RunConfig::layers),
        count_field("hidden", &RunConfig::hidden),
        count_field("enc_hidden", &RunConfig::enc_hidden),
        count_field("size_width", &RunConfig::size_width),
        real_field("tau", &RunConfig::tau),
        real_field("alpha1", &RunConfig::alpha1),
        real_field("alpha2", &RunConfig::alpha2),
        real_field("beta1", &RunConfig::beta1),
        real_field("beta2", &RunConfig::beta2),
        real_field("beta3", &RunConfig::beta3),
        real_field("ridge", &RunConfig::ridge),
        real_field("epsilon", &RunConfig::epsilon),
        real_field("k1_fraction", &RunConfig::k1_fraction),
        real_field("k2_fraction", &RunConfig::k2_fraction),
        real_field("learning_rate", &RunConfig::learning_rate),
        count_field("batch_size", &RunConfig::batch_size),
        count_field("max_epochs", &RunConfig::max_epochs),
        count_field("patience", &RunConfig::patience),
        {"warm_start", [](const RunConfig& c) { return std::string(c.warm_start ? "true" : "false"); },
         [](RunConfig& c, const std::string& v) { c.warm_start = to_bool("warm_start", v); }},
        kind_field("explainer_backbone", &RunConfig::explainer_backbone),
        count_field("pretrain_epochs", &RunConfig::pretrain_epochs),
        count_field("pretrain_patience", &RunConfig::pretrain_patience),
        count_field("seed", &RunConfig::seed),
        text_field("dataset_path", &RunConfig::dataset_path),
        text_field("dataset_name", &RunConfig::dataset_name),
        {"split_ratios",
         [](const RunConfig& c) {
             return format_real(c.split.train) + "," + format_real(c.split.validation) + "," + format_real(c.split.test);
         },
         [](RunConfig& c, const std::string& v) {
             const auto items = split_list(v);
             if (items.size() != 3) throw ConfigError("split_ratios: expected three comma-separated values");
             c.split = {to_real("split_ratios", items[0]), to_real("split_ratios", items[1]),
                        to_real("split_ratios", items[2])};
         }},
        {"upsample",
         [](const RunConfig& c) {
             std::string out;
             for (const auto& [cls, ratio] : c.upsample) {
                 if (!out.empty()) out += ",";
                 out += std::to_string(cls) + ":" + std::to_string(ratio);
             }
             return out;
         },
         [](RunConfig& c, const std::string& v) {
             c.upsample.clear();
             for (const auto& item : split_list(v)) {
                 const auto colon = item.find(':');
                 if (colon == std::string::npos) throw ConfigError("upsample: expected class:ratio, got '" + item + "'");
                 c.upsample.emplace_back(to_count("upsample", trim(item.substr(0, colon))),
                                         to_count("upsample", trim(item.substr(colon + 1))));
             }
         }},
        {"seeds",
         [](const RunConfig& c) {
             std::string out;
             for (auto s : c.seeds) out += (out.empty() ? "" : ",") + std::to_string(s);
             return out;
         },
         [](RunConfig& c, const std::string& v) {
             c.seeds.clear();
             for (const auto& item : split_list(v)) c.seeds.push_back(to_count("seeds", item));
         }},
        count_field("synth_per_class", &RunConfig::synth_per_class),
    };
    return fields;
}

}  // namespace

void validate(const RunConfig& c) {
    auto require = [](bool ok, const std::string& what) {
        if (!ok) throw ConfigError(what);
    };
    require(c.layers >= 1, "layers must be >= 1");
    require(c.hidden >= 1 && c.enc_hidden >= 1 && c.size_width >= 1, "widths must be >= 1");
    require(c.tau > 0.0, "tau must be positive");
    require(c.ridge >= 0.0, "ridge must be non-negative");
    require(c.epsilon > 0.0, "epsilon must be positive");
    require(c.k1_fraction >= 0.0 && c.k1_fraction <= 1.0, "k1_fraction must lie in [0, 1]");
    require(c.k2_fraction >= 0.0 && c.k2_fraction <= 1.0, "k2_fraction must lie in [0, 1]");
    require(c.learning_rate > 0.0, "learning_rate must be positive");
    require(c.batch_size >= 1, "batch_size must be >= 1");
    require(c.split.train > 0.0 && c.split.validation >= 0.0 && c.split.test > 0.0, "split_ratios must be positive");
    for (const auto& [cls, ratio] : c.upsample) {
        (void)cls;
        require(ratio >= 1, "upsample ratio must be >= 1");
    }
}

RunConfig parse_run_config(const std::string& text) {
    RunConfig config;
    std::set<std::string> seen;
    std::istringstream in(text);
    std::string line;
    std::size_t number = 0;
    while (std::getline(in, line)) {
        ++number;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("line " + std::to_string(number) + ": expected 'key = value'");
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        const Field* field = nullptr;
        for (const auto& f : schema())
            if (key == f.key) field = &f;
        if (!field) throw ConfigError("line " + std::to_string(number) + ": unknown key '" + key + "'");
        if (!seen.insert(key).second) {
            throw ConfigError("line " + std::to_string(number) + ": duplicate key '" + key + "'");
        }
        try {
            field->set(config, value);
        } catch (const ConfigError& e) {
            throw ConfigError("line " + std::to_string(number) + ": " + e.what());
        }
    }
    validate(config);
    return config;
}

RunConfig load_run_config(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot read config " + path.string());
    std::stringstream buffer;
    buffer << in.rdbuf();
    return parse_run_config(buffer.str());
}

std::string to_config_text(const RunConfig& config) {
    std::string out;
    for (const auto& f : schema()) out += std::string(f.key) + " = " + f.get(config) + "\n";
    return out;
}

std::string to_config_json(const RunConfig& c) {
    nlohmann::ordered_json j;
    j["backbone"] = to_string(c.backbone);
    j["layers"] = c.layers;
    j["hidden"] = c.hidden;
    j["enc_hidden"] = c.enc_hidden;
    j["size_width"] = c.size_width;
    j["tau"] = c.tau;
    j["alpha1"] = c.alpha1;
    j["alpha2"] = c.alpha2;
    j["beta1"] = c.beta1;
    j["beta2"] = c.beta2;
    j["beta3"] = c.beta3;
    j["ridge"] = c.ridge;
    j["epsilon"] = c.epsilon;
    j["k1_fraction"] = c.k1_fraction;
    j["k2_fraction"] = c.k2_fraction;
    j["learning_rate"] = c.learning_rate;
    j["batch_size"] = c.batch_size;
    j["max_epochs"] = c.max_epochs;
    j["patience"] = c.patience;
    j["warm_start"] = c.warm_start;
    j["explainer_backbone"] = to_string(c.explainer_backbone);
    j["pretrain_epochs"] = c.pretrain_epochs;
    j["pretrain_patience"] = c.pretrain_patience;
    j["seed"] = c.seed;
    j["dataset_path"] = c.dataset_path;
    j["dataset_name"] = c.dataset_name;
    j["split_ratios"] = {c.split.train, c.split.validation, c.split.test};
    auto up = nlohmann::ordered_json::array();
    for (const auto& [cls, ratio] : c.upsample) up.push_back({{"class", cls}, {"ratio", ratio}});
    j["upsample"] = up;
    j["seeds"] = c.seeds;
    j["synth_per_class"] = c.synth_per_class;
    j["importance_scale"] = "predicted-class probability drop";
    j["config_hash"] = std::to_string(config_hash(c));
    return j.dump(2) + "\n";
}

std::uint64_t config_hash(const RunConfig& config) {
    RunConfig copy = config;
    copy.seed = 0;
    const std::string text = to_config_text(copy);
    return fnv1a(text.data(), text.size());
}

}  // namespace disgen
