#include "crossmap/dataset.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace crossmap::io {

namespace {

using nlohmann::json;

std::string where(const std::filesystem::path& path, std::size_t row, std::size_t col = 0) {
    std::string s = path.string() + ":" + std::to_string(row);
    if (col > 0) s += ":" + std::to_string(col);
    return s;
}

std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t pos = line.find(sep, start);
        if (pos == std::string::npos) {
            out.push_back(line.substr(start));
            break;
        }
        out.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
    return out;
}

std::string trim(const std::string& s) {
    std::size_t a = 0, b = s.size();
    while (a < b && (s[a] == ' ' || s[a] == '\t' || s[a] == '\r')) ++a;
    while (b > a && (s[b - 1] == ' ' || s[b - 1] == '\t' || s[b - 1] == '\r')) --b;
    return s.substr(a, b - a);
}

double parse_double(const std::string& token, const std::filesystem::path& path,
                    std::size_t row, std::size_t col) {
    const std::string t = trim(token);
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), value);
    if (ec != std::errc{} || ptr != t.data() + t.size()) {
        throw ParseError(where(path, row, col) + ": non-numeric cell '" + token + "'");
    }
    return value;
}

int parse_int(const std::string& token, const std::filesystem::path& path, std::size_t row,
              std::size_t col) {
    const std::string t = trim(token);
    int value = 0;
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), value);
    if (ec != std::errc{} || ptr != t.data() + t.size()) {
        throw ParseError(where(path, row, col) + ": non-integer cell '" + token + "'");
    }
    return value;
}

std::vector<std::string> read_lines(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw ParseError(path.string() + ": cannot open file");
    }
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) {
        lines.push_back(line);
    }
    // Allow a trailing newline; drop only fully empty final lines.
    while (!lines.empty() && trim(lines.back()).empty()) lines.pop_back();
    return lines;
}

} // namespace

Eigen::MatrixXd load_feature_csv(const std::filesystem::path& path) {
    const std::vector<std::string> lines = read_lines(path);
    if (lines.empty()) {
        throw ParseError(path.string() + ": empty feature file");
    }
    const std::size_t cols = split(lines[0], ',').size();
    Eigen::MatrixXd m(static_cast<Eigen::Index>(lines.size()), static_cast<Eigen::Index>(cols));
    for (std::size_t r = 0; r < lines.size(); ++r) {
        const std::vector<std::string> cells = split(lines[r], ',');
        if (cells.size() != cols) {
            throw ParseError(where(path, r + 1) + ": expected " + std::to_string(cols) +
                             " columns, found " + std::to_string(cells.size()));
        }
        for (std::size_t c = 0; c < cols; ++c) {
            const double v = parse_double(cells[c], path, r + 1, c + 1);
            if (!std::isfinite(v)) {
                throw ParseError(where(path, r + 1, c + 1) + ": non-finite value");
            }
            m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = v;
        }
    }
    return m;
}

std::vector<std::vector<int>> load_label_csv(const std::filesystem::path& path) {
    const std::vector<std::string> lines = read_lines(path);
    std::vector<std::vector<int>> labels;
    labels.reserve(lines.size());
    for (std::size_t r = 0; r < lines.size(); ++r) {
        const std::string t = trim(lines[r]);
        if (t == "?") {
            labels.emplace_back();
            continue;
        }
        std::vector<int> row;
        for (const std::string& cell : split(t, ';')) {
            row.push_back(parse_int(cell, path, r + 1, row.size() + 1));
        }
        labels.push_back(std::move(row));
    }
    return labels;
}

Eigen::VectorXi load_correspondence_csv(const std::filesystem::path& path,
                                        Eigen::Index source_count,
                                        Eigen::Index target_count) {
    const std::vector<std::string> lines = read_lines(path);
    Eigen::VectorXi rho = Eigen::VectorXi::Constant(source_count, -1);
    for (std::size_t r = 0; r < lines.size(); ++r) {
        const std::vector<std::string> cells = split(lines[r], ',');
        if (cells.size() != 2) {
            throw ParseError(where(path, r + 1) + ": expected 'source,target' pair");
        }
        const int src = parse_int(cells[0], path, r + 1, 1);
        const int dst = parse_int(cells[1], path, r + 1, 2);
        if (src < 1 || src > source_count) {
            throw ParseError(where(path, r + 1, 1) + ": source index out of range");
        }
        if (dst < 1 || dst > target_count) {
            throw ParseError(where(path, r + 1, 2) + ": target index out of range");
        }
        rho(src - 1) = dst - 1;
    }
    for (Eigen::Index r = 0; r < rho.size(); ++r) {
        if (rho(r) < 0) {
            throw ParseError(path.string() + ": no correspondence for source row " +
                             std::to_string(r + 1));
        }
    }
    return rho;
}

void write_feature_csv(const std::filesystem::path& path, const Eigen::MatrixXd& m) {
    std::ofstream out(path);
    if (!out) throw ArgumentError("cannot write " + path.string());
    char buf[64];
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        for (Eigen::Index c = 0; c < m.cols(); ++c) {
            std::snprintf(buf, sizeof(buf), "%.17g", m(r, c));
            out << (c > 0 ? "," : "") << buf;
        }
        out << "\n";
    }
}

void write_label_csv(const std::filesystem::path& path,
                     const std::vector<std::vector<int>>& labels) {
    std::ofstream out(path);
    if (!out) throw ArgumentError("cannot write " + path.string());
    for (const auto& row : labels) {
        if (row.empty()) {
            out << "?\n";
            continue;
        }
        for (std::size_t i = 0; i < row.size(); ++i) {
            out << (i > 0 ? ";" : "") << row[i];
        }
        out << "\n";
    }
}

void write_correspondence_csv(const std::filesystem::path& path, const Eigen::VectorXi& rho) {
    std::ofstream out(path);
    if (!out) throw ArgumentError("cannot write " + path.string());
    for (Eigen::Index r = 0; r < rho.size(); ++r) {
        out << r + 1 << "," << rho(r) + 1 << "\n";
    }
}

namespace {

fmbsd::Config parse_fmbsd(const json& j, const std::filesystem::path& path) {
    fmbsd::Config cfg;
    cfg.alpha = j.value("alpha", cfg.alpha);
    cfg.beta = j.value("beta", cfg.beta);
    cfg.lambda_b = j.value("lambda_b", cfg.lambda_b);
    cfg.lambda_w = j.value("lambda_w", cfg.lambda_w);
    cfg.k_basis = j.value("k_basis", cfg.k_basis);
    cfg.knn = j.value("knn", cfg.knn);
    cfg.resolution = j.value("resolution", cfg.resolution);
    cfg.max_iters = j.value("max_iters", cfg.max_iters);
    cfg.grad_tol = j.value("grad_tol", cfg.grad_tol);
    const std::string sigma = j.value("sigma_mode", std::string("stddev"));
    if (sigma == "stddev") {
        cfg.sigma_mode = sgws::SimilarityBandwidth::std_dev;
    } else if (sigma == "variance") {
        cfg.sigma_mode = sgws::SimilarityBandwidth::variance;
    } else {
        throw ParseError(path.string() + ": fmbsd.sigma_mode must be stddev or variance");
    }
    const std::string flavor = j.value("smoothness_flavor", std::string("combinatorial"));
    if (flavor == "combinatorial") {
        cfg.smoothness_flavor = graph::LaplacianFlavor::combinatorial;
    } else if (flavor == "normalized") {
        cfg.smoothness_flavor = graph::LaplacianFlavor::normalized;
    } else {
        throw ParseError(path.string() +
                         ": fmbsd.smoothness_flavor must be combinatorial or normalized");
    }
    if (cfg.alpha <= 0.0 && cfg.beta <= 0.0) {
        throw ParseError(path.string() + ": fmbsd needs alpha > 0 or beta > 0");
    }
    return cfg;
}

M2cpcSettings parse_m2cpc(const json& j, const std::filesystem::path& path) {
    M2cpcSettings s;
    s.gamma_a = j.value("gamma_a", s.gamma_a);
    s.gamma_w = j.value("gamma_w", s.gamma_w);
    s.gamma_b = j.value("gamma_b", s.gamma_b);
    s.kernel_width = j.value("kernel_width", s.kernel_width);
    const std::string mode = j.value("mp_mode", std::string("laplacian-exact"));
    if (mode == "laplacian-exact") {
        s.mp_mode = m2cpc::MpMode::laplacian_exact;
    } else if (mode == "paper-verbatim") {
        s.mp_mode = m2cpc::MpMode::paper_verbatim;
    } else {
        throw ParseError(path.string() +
                         ": m2cpc.mp_mode must be laplacian-exact or paper-verbatim");
    }
    s.use_ground_truth_correspondences = j.value("use_ground_truth_correspondences", false);
    return s;
}

} // namespace

Manifest load_manifest(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw ParseError(path.string() + ": cannot open manifest");
    }
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ParseError(path.string() + ": " + e.what());
    }

    Manifest man;
    const std::filesystem::path base = path.parent_path();
    if (!j.contains("modalities") || !j["modalities"].is_array() || j["modalities"].empty()) {
        throw ParseError(path.string() + ": manifest needs a non-empty 'modalities' array");
    }
    for (const json& entry : j["modalities"]) {
        ModalityEntry me;
        if (!entry.contains("id") || !entry.contains("features")) {
            throw ParseError(path.string() + ": each modality needs 'id' and 'features'");
        }
        me.id = entry["id"].get<std::string>();
        me.features = base / entry["features"].get<std::string>();
        if (entry.contains("labels")) {
            me.labels = base / entry["labels"].get<std::string>();
        }
        if (entry.contains("eval_labels")) {
            me.eval_labels = base / entry["eval_labels"].get<std::string>();
        }
        man.modalities.push_back(std::move(me));
    }
    if (j.contains("ground_truth")) {
        man.ground_truth = base / j["ground_truth"].get<std::string>();
    }
    man.classes = j.value("classes", 0);
    man.fmbsd = parse_fmbsd(j.value("fmbsd", json::object()), path);
    man.m2cpc = parse_m2cpc(j.value("m2cpc", json::object()), path);
    return man;
}

Dataset load_dataset(const std::filesystem::path& manifest_path) {
    Dataset ds;
    ds.manifest = load_manifest(manifest_path);

    for (const ModalityEntry& entry : ds.manifest.modalities) {
        graph::FeatureMatrix fm;
        fm.id = entry.id;
        fm.data = load_feature_csv(entry.features);
        const Eigen::Index n = fm.data.rows();
        ds.features.push_back(std::move(fm));

        auto read_aligned = [&](const std::optional<std::filesystem::path>& p)
            -> std::optional<std::vector<std::vector<int>>> {
            if (!p) return std::nullopt;
            std::vector<std::vector<int>> labels = load_label_csv(*p);
            if (static_cast<Eigen::Index>(labels.size()) != n) {
                throw ParseError(p->string() + ": " + std::to_string(labels.size()) +
                                 " label rows vs " + std::to_string(n) + " feature rows");
            }
            return labels;
        };
        ds.labels.push_back(read_aligned(entry.labels));
        ds.eval_labels.push_back(read_aligned(entry.eval_labels));
    }

    if (ds.manifest.ground_truth) {
        if (ds.features.size() < 2) {
            throw ParseError(manifest_path.string() +
                             ": ground_truth needs at least two modalities");
        }
        ds.ground_truth = load_correspondence_csv(*ds.manifest.ground_truth,
                                                  ds.features[0].data.rows(),
                                                  ds.features[1].data.rows());
    }
    return ds;
}

} // namespace crossmap::io
