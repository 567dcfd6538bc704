#include "disgen/artifacts.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "disgen/error.hpp"
#include "disgen/tu_format.hpp"

namespace disgen {

namespace fs = std::filesystem;

namespace {

std::ofstream open_out(const fs::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw FormatError("cannot write " + path.string());
    return out;
}

/// Whitespace-separated tokens of a whole file, with the file name in errors.
class Tokens {
public:
    explicit Tokens(const fs::path& path) : path_(path) {
        std::ifstream in(path, std::ios::binary);
        if (!in) throw MissingDependencyError("artifact not found: " + path.string());
        std::ostringstream buf;
        buf << in.rdbuf();
        text_ = buf.str();
    }

    std::string next() {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
        if (pos_ >= text_.size()) fail("unexpected end of file");
        const std::size_t start = pos_;
        while (pos_ < text_.size() && !std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
        return text_.substr(start, pos_ - start);
    }

    bool at_end() {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
        return pos_ >= text_.size();
    }

    void expect(const std::string& word) {
        const std::string got = next();
        if (got != word) fail("expected '" + word + "', found '" + got + "'");
    }

    template <typename T>
    T number() {
        const std::string t = next();
        T v{};
        const auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
        if (ec != std::errc{} || p != t.data() + t.size()) fail("bad number '" + t + "'");
        return v;
    }

    [[noreturn]] void fail(const std::string& what) const { throw FormatError(path_.string() + ": " + what); }

private:
    fs::path path_;
    std::string text_;
    std::size_t pos_ = 0;
};

void put_graph(std::ostream& out, const GraphRecord& g) {
    out << "graph " << g.id << ' ' << g.label << ' ' << g.num_nodes() << ' ' << g.feature_width() << ' '
        << g.num_edges() << '\n';
    for (std::size_t i = 0; i < g.num_nodes(); ++i) {
        for (std::size_t j = 0; j < g.feature_width(); ++j) out << (j ? " " : "") << format_real(g.features(i, j));
        out << '\n';
    }
    for (const Edge& e : g.edges) out << e.u << ' ' << e.v << '\n';
}

GraphRecord get_graph(Tokens& in) {
    in.expect("graph");
    const auto id = in.number<std::int64_t>();
    const auto label = in.number<std::size_t>();
    const auto nodes = in.number<std::size_t>();
    const auto width = in.number<std::size_t>();
    const auto edges = in.number<std::size_t>();
    Tensor features(nodes, width);
    for (std::size_t i = 0; i < features.size(); ++i) features[i] = in.number<double>();
    std::vector<Edge> list(edges);
    for (Edge& e : list) {
        e.u = in.number<std::size_t>();
        e.v = in.number<std::size_t>();
    }
    try {
        return make_graph(id, std::move(features), std::move(list), label);
    } catch (const ContractError& e) {
        in.fail(e.what());
    }
}

void put_tensor(std::ostream& out, const std::string& name, const Tensor& t) {
    out << "tensor " << name << ' ' << t.rows() << ' ' << t.cols() << '\n';
    for (std::size_t i = 0; i < t.size(); ++i) out << (i ? " " : "") << format_real(t[i]);
    out << '\n';
}

}  // namespace

void write_split(const fs::path& path, const DatasetSplit& split) {
    auto out = open_out(path);
    out << "# disgen-split 1\n";
    auto part = [&](const char* name, const std::vector<std::int64_t>& ids) {
        out << name << ' ' << ids.size();
        for (auto id : ids) out << ' ' << id;
        out << '\n';
    };
    part("train", split.train);
    part("validation", split.validation);
    part("small_test", split.small_test);
    part("large_test", split.large_test);
}

DatasetSplit read_split(const fs::path& path) {
    Tokens in(path);
    in.expect("#");
    in.expect("disgen-split");
    in.expect("1");
    DatasetSplit split;
    auto part = [&](const char* name, std::vector<std::int64_t>& ids) {
        in.expect(name);
        ids.resize(in.number<std::size_t>());
        for (auto& id : ids) id = in.number<std::int64_t>();
    };
    part("train", split.train);
    part("validation", split.validation);
    part("small_test", split.small_test);
    part("large_test", split.large_test);
    return split;
}

void write_triples(const fs::path& path, std::span<const ViewTriple> triples) {
    auto out = open_out(path);
    out << "# disgen-triples 1\n" << "count " << triples.size() << '\n';
    for (const ViewTriple& t : triples) {
        const AugmentationAudit& a = t.audit;
        out << "audit " << a.k1 << ' ' << a.k2_initial << ' ' << a.k2_final << ' ' << a.retries << ' ' << a.attempts
            << ' ' << a.passed << ' ' << a.size_view_label_changed << '\n';
        put_graph(out, t.original);
        put_graph(out, t.size_invariant);
        put_graph(out, t.task_invariant);
    }
}

std::vector<ViewTriple> read_triples(const fs::path& path) {
    Tokens in(path);
    in.expect("#");
    in.expect("disgen-triples");
    in.expect("1");
    in.expect("count");
    std::vector<ViewTriple> out(in.number<std::size_t>());
    for (ViewTriple& t : out) {
        in.expect("audit");
        AugmentationAudit& a = t.audit;
        a.k1 = in.number<std::size_t>();
        a.k2_initial = in.number<std::size_t>();
        a.k2_final = in.number<std::size_t>();
        a.retries = in.number<std::size_t>();
        a.attempts = in.number<std::size_t>();
        a.passed = in.number<int>() != 0;
        a.size_view_label_changed = in.number<int>() != 0;
        t.original = get_graph(in);
        t.size_invariant = get_graph(in);
        t.task_invariant = get_graph(in);
    }
    if (!in.at_end()) in.fail("trailing content after the last triple");
    return out;
}

void save_trained_model(const fs::path& path, const TrainedModel& model) {
    auto out = open_out(path);
    const BackboneConfig& b = model.backbone;
    const HeadConfig& h = model.heads;
    out << "# disgen-model 1\n";
    out << "backbone " << to_string(b.kind) << ' ' << b.layers << ' ' << b.hidden << ' ' << b.input_width << '\n';
    out << "heads " << h.backbone_width << ' ' << h.hidden << ' ' << h.size_width << ' ' << h.num_classes << '\n';
    out << "tensors " << model.params.size() << '\n';
    for (const auto& [name, entry] : model.params.entries()) put_tensor(out, name, entry.value);
}

TrainedModel load_trained_model(const fs::path& path) {
    Tokens in(path);
    in.expect("#");
    in.expect("disgen-model");
    in.expect("1");
    TrainedModel m;
    in.expect("backbone");
    try {
        m.backbone.kind = parse_backbone_kind(in.next());
    } catch (const Error& e) {
        in.fail(e.what());
    }
    m.backbone.layers = in.number<std::size_t>();
    m.backbone.hidden = in.number<std::size_t>();
    m.backbone.input_width = in.number<std::size_t>();
    in.expect("heads");
    m.heads.backbone_width = in.number<std::size_t>();
    m.heads.hidden = in.number<std::size_t>();
    m.heads.size_width = in.number<std::size_t>();
    m.heads.num_classes = in.number<std::size_t>();
    in.expect("tensors");
    const auto count = in.number<std::size_t>();
    for (std::size_t k = 0; k < count; ++k) {
        in.expect("tensor");
        const std::string name = in.next();
        const auto rows = in.number<std::size_t>();
        const auto cols = in.number<std::size_t>();
        std::vector<double> values(rows * cols);
        for (double& v : values) v = in.number<double>();
        m.params.add(name, Tensor(rows, cols, std::move(values)));
    }
    m.params.freeze();
    return m;
}

}  // namespace disgen
