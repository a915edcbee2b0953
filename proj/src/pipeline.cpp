#include "crossmap/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

#include "crossmap/metrics.hpp"

namespace crossmap::pipeline {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

std::string fmt(double v, int digits = 9) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*g", digits, v);
    return buf;
}

template <typename Fn>
auto with_stage(const std::string& stage, Fn&& fn) {
    try {
        return fn();
    } catch (const ParseError& e) {
        throw ParseError(stage + ": " + e.what());
    } catch (const ArgumentError& e) {
        throw ArgumentError(stage + ": " + e.what());
    } catch (const NumericalError& e) {
        throw NumericalError(stage + ": " + e.what());
    }
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw ArgumentError("cannot write " + path.string());
    out << text;
}

void write_json(const fs::path& path, const json& j) {
    std::ofstream out(path);
    if (!out) throw ArgumentError("cannot write " + path.string());
    out << j.dump(2) << "\n";
}

// ---------------------------------------------------------------- synth ----

synth::SyntheticSpec parse_spec(const json& j, const fs::path& path) {
    synth::SyntheticSpec spec;
    const std::string family = j.value("family", std::string("two-moons"));
    if (family == "two-moons") {
        spec.family = synth::LatentFamily::two_moons;
    } else if (family == "swiss-roll") {
        spec.family = synth::LatentFamily::swiss_roll;
    } else {
        throw ParseError(path.string() + ": family must be two-moons or swiss-roll");
    }
    spec.n = j.value("n", spec.n);
    spec.classes = family == "two-moons" ? 2 : j.value("classes", spec.classes);
    spec.latent_seed = j.value("latent_seed", spec.latent_seed);
    spec.permutation_seed = j.value("permutation_seed", spec.permutation_seed);
    spec.labeled_fraction = j.value("labeled_fraction", spec.labeled_fraction);
    spec.label_seed = j.value("label_seed", spec.label_seed);
    if (!j.contains("modalities") || !j["modalities"].is_array() || j["modalities"].empty()) {
        throw ParseError(path.string() + ": spec needs a non-empty 'modalities' array");
    }
    for (const json& entry : j["modalities"]) {
        synth::ModalitySpec ms;
        ms.dim = entry.value("dim", ms.dim);
        ms.map_seed = entry.value("map_seed", ms.map_seed);
        ms.noise = entry.value("noise", ms.noise);
        spec.modalities.push_back(ms);
    }
    return spec;
}

} // namespace

void run_synth(const fs::path& spec_json, const fs::path& out_dir) {
    std::ifstream in(spec_json);
    if (!in) throw ParseError(spec_json.string() + ": cannot open spec");
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ParseError(spec_json.string() + ": " + e.what());
    }
    const synth::SyntheticSpec spec = parse_spec(j, spec_json);
    const synth::SyntheticDataset ds =
        with_stage("synth", [&] { return synth::generate_synthetic(spec); });

    fs::create_directories(out_dir);
    const bool masked = spec.labeled_fraction < 1.0;

    json manifest;
    manifest["classes"] = spec.classes;
    manifest["modalities"] = json::array();
    for (std::size_t i = 0; i < ds.features.size(); ++i) {
        std::string id = "m" + std::to_string(i + 1);
        if (j["modalities"][i].contains("id")) {
            id = j["modalities"][i]["id"].get<std::string>();
        }
        const std::string feat = "features_" + id + ".csv";
        const std::string lab = "labels_" + id + ".csv";
        io::write_feature_csv(out_dir / feat, ds.features[i]);

        std::vector<std::vector<int>> train_rows, full_rows;
        for (std::size_t r = 0; r < ds.labels[i].size(); ++r) {
            full_rows.push_back({ds.labels[i][r]});
            if (ds.train_labels[i][r] == 0) {
                train_rows.emplace_back();
            } else {
                train_rows.push_back({ds.train_labels[i][r]});
            }
        }
        io::write_label_csv(out_dir / lab, train_rows);

        json entry;
        entry["id"] = id;
        entry["features"] = feat;
        entry["labels"] = lab;
        if (masked) {
            const std::string full = "labels_full_" + id + ".csv";
            io::write_label_csv(out_dir / full, full_rows);
            entry["eval_labels"] = full;
        }
        manifest["modalities"].push_back(entry);
    }
    if (!ds.truth.empty()) {
        io::write_correspondence_csv(out_dir / "ground_truth.csv", ds.truth[0]);
        manifest["ground_truth"] = "ground_truth.csv";
    }
    if (j.contains("fmbsd")) manifest["fmbsd"] = j["fmbsd"];
    if (j.contains("m2cpc")) manifest["m2cpc"] = j["m2cpc"];
    write_json(out_dir / "manifest.json", manifest);
}

// ------------------------------------------------------------- pipeline ----

namespace {

struct Prepared {
    io::Dataset ds;
    fmbsd::Config cfg;
    std::vector<fmbsd::ModalityBundle> bundles;
};

Prepared prepare(const fs::path& manifest_path, std::size_t min_modalities) {
    Prepared p;
    p.ds = with_stage("load", [&] { return io::load_dataset(manifest_path); });
    p.cfg = p.ds.manifest.fmbsd;
    if (p.ds.features.size() < min_modalities) {
        throw ArgumentError("load: task needs at least " + std::to_string(min_modalities) +
                            " modalities");
    }
    with_stage("spectral", [&] {
        std::vector<fmbsd::SpectralScaffold> scaffolds;
        scaffolds.reserve(p.ds.features.size());
        for (const auto& fm : p.ds.features) {
            scaffolds.push_back(fmbsd::build_scaffold(fm, p.cfg));
        }
        const sgws::WaveletKernelSpec spec =
            fmbsd::shared_wavelet_spec(scaffolds, p.cfg.resolution);
        for (std::size_t i = 0; i < scaffolds.size(); ++i) {
            p.bundles.push_back(
                fmbsd::finish_bundle(p.ds.features[i].id, scaffolds[i], spec));
        }
        return 0;
    });
    return p;
}

struct PairFit {
    fmbsd::FunctionalMap map;
    fmbsd::CorrespondenceMatrix correspondences;
    double bandwidth = 0.0;
};

PairFit fit_pair(const Prepared& p, std::size_t i, std::size_t j) {
    const sgws::CrossSimilarity pi = sgws::cross_similarity(
        p.bundles[i].signatures, p.bundles[j].signatures, p.cfg.sigma_mode);
    PairFit out;
    out.bandwidth = pi.bandwidth;
    out.map = fmbsd::fit_map(p.bundles[i], p.bundles[j], pi.pi, p.cfg);
    out.correspondences = fmbsd::extract_correspondences(
        p.bundles[i].basis.basis, out.map.c, p.bundles[j].basis.basis);
    return out;
}

double correspondence_accuracy(const Eigen::VectorXi& rho, const Eigen::VectorXi& truth) {
    Eigen::Index hit = 0;
    for (Eigen::Index r = 0; r < rho.size(); ++r) {
        if (rho(r) == truth(r)) ++hit;
    }
    return static_cast<double>(hit) / static_cast<double>(rho.size());
}

std::vector<int> single_labels(const std::vector<std::vector<int>>& rows,
                               const std::string& context) {
    std::vector<int> out;
    out.reserve(rows.size());
    for (const auto& row : rows) {
        if (row.empty()) {
            out.push_back(0);
        } else if (row.size() == 1) {
            out.push_back(row[0]);
        } else {
            throw ArgumentError(context + ": multi-label rows not usable here");
        }
    }
    return out;
}

void run_correspond(const Prepared& p, const fs::path& out_dir) {
    std::string report = "task: correspond\n";
    json jr;
    jr["task"] = "correspond";
    jr["pairs"] = json::array();

    for (std::size_t i = 0; i < p.bundles.size(); ++i) {
        for (std::size_t j = i + 1; j < p.bundles.size(); ++j) {
            const PairFit fit = with_stage("correspond", [&] { return fit_pair(p, i, j); });
            const std::string a = p.bundles[i].id, b = p.bundles[j].id;
            io::write_correspondence_csv(out_dir / ("correspondences_" + a + "_" + b + ".csv"),
                                         fit.correspondences.rho);
            report += "pair " + a + "->" + b + ": objective " + fmt(fit.map.objective) +
                      ", iterations " + std::to_string(fit.map.iterations) + ", bandwidth " +
                      fmt(fit.bandwidth) + "\n";
            json pj;
            pj["source"] = a;
            pj["target"] = b;
            pj["objective"] = fit.map.objective;
            pj["iterations"] = fit.map.iterations;
            pj["bandwidth"] = fit.bandwidth;
            if (i == 0 && j == 1 && p.ds.ground_truth) {
                const double acc =
                    correspondence_accuracy(fit.correspondences.rho, *p.ds.ground_truth);
                report += "pair " + a + "->" + b + ": correspondence accuracy " +
                          fmt(acc, 6) + "\n";
                pj["accuracy"] = acc;
            }
            jr["pairs"].push_back(pj);
        }
    }
    write_text(out_dir / "report.txt", report);
    write_json(out_dir / "report.json", jr);
}

void run_retrieve(const Prepared& p, const fs::path& out_dir, Eigen::Index k_ret) {
    // Relevance labels: evaluation labels when provided, training labels
    // otherwise (unlabeled rows are skipped by the scorer).
    std::vector<const std::vector<std::vector<int>>*> scoring(p.ds.labels.size());
    for (std::size_t i = 0; i < p.ds.labels.size(); ++i) {
        if (p.ds.eval_labels[i]) {
            scoring[i] = &*p.ds.eval_labels[i];
        } else if (p.ds.labels[i]) {
            scoring[i] = &*p.ds.labels[i];
        } else {
            throw ArgumentError("retrieve: every modality needs labels for MAP scoring");
        }
    }
    // Shared-label relevance as soon as any row carries several labels.
    metrics::RelevanceRule rule = metrics::RelevanceRule::same_label;
    for (const auto* labels : scoring) {
        for (const auto& row : *labels) {
            if (row.size() > 1) rule = metrics::RelevanceRule::shared_label;
        }
    }

    std::string report = "task: retrieve\n";
    json jr;
    jr["task"] = "retrieve";
    jr["directions"] = json::array();
    double map_sum = 0.0;
    int map_count = 0;

    for (std::size_t i = 0; i < p.bundles.size(); ++i) {
        for (std::size_t j = 0; j < p.bundles.size(); ++j) {
            if (i == j) continue;
            const PairFit fit = with_stage("retrieve", [&] { return fit_pair(p, i, j); });
            const Eigen::MatrixXd aligned = p.bundles[i].basis.basis * fit.map.c;
            const numkit::NeighborIndex index(p.bundles[j].basis.basis);
            const Eigen::Index nj = p.bundles[j].basis.basis.rows();
            const Eigen::Index keep = std::min(k_ret < 1 ? nj : k_ret, nj);

            std::vector<std::vector<Eigen::Index>> rankings(
                static_cast<std::size_t>(aligned.rows()));
            for (Eigen::Index q = 0; q < aligned.rows(); ++q) {
                rankings[static_cast<std::size_t>(q)] =
                    index.query(aligned.row(q).transpose(), nj);
            }
            const metrics::RetrievalResult scored =
                metrics::map_score(rankings, *scoring[i], *scoring[j], rule);

            const std::string a = p.bundles[i].id, b = p.bundles[j].id;
            std::ofstream lists(out_dir / ("retrieval_" + a + "_" + b + ".csv"));
            for (std::size_t q = 0; q < rankings.size(); ++q) {
                lists << q + 1;
                for (Eigen::Index r = 0; r < keep; ++r) {
                    lists << "," << rankings[q][static_cast<std::size_t>(r)] + 1;
                }
                lists << "\n";
            }

            const bool defined = scored.admissible > 0;
            report += "direction " + a + "->" + b + ": map " +
                      (defined ? fmt(scored.map, 6) : std::string("undefined")) +
                      " (admissible " + std::to_string(scored.admissible) + ", skipped " +
                      std::to_string(scored.skipped) + ")\n";
            json dj;
            dj["source"] = a;
            dj["target"] = b;
            dj["admissible"] = scored.admissible;
            dj["skipped"] = scored.skipped;
            if (defined) {
                dj["map"] = scored.map;
                map_sum += scored.map;
                ++map_count;
            }
            jr["directions"].push_back(dj);
        }
    }
    if (map_count > 0) {
        report += "mean map: " + fmt(map_sum / map_count, 6) + "\n";
        jr["mean_map"] = map_sum / map_count;
    }
    write_text(out_dir / "report.txt", report);
    write_json(out_dir / "report.json", jr);
}

void run_classify(const Prepared& p, const fs::path& out_dir) {
    const std::size_t m = p.ds.features.size();
    std::vector<std::vector<int>> train_labels(m);
    for (std::size_t i = 0; i < m; ++i) {
        if (!p.ds.labels[i]) {
            throw ArgumentError("classify: modality " + p.ds.features[i].id +
                                " has no labels");
        }
        train_labels[i] = single_labels(*p.ds.labels[i], "classify");
    }

    int classes = p.ds.manifest.classes;
    if (classes == 0) {
        for (std::size_t i = 0; i < m; ++i) {
            for (int v : train_labels[i]) classes = std::max(classes, v);
            if (p.ds.eval_labels[i]) {
                for (const auto& row : *p.ds.eval_labels[i]) {
                    for (int v : row) classes = std::max(classes, v);
                }
            }
        }
    }
    if (classes < 2) {
        throw ArgumentError("classify: need at least two classes");
    }

    const io::M2cpcSettings& ms = p.ds.manifest.m2cpc;
    m2cpc::TrainInputs inputs;
    inputs.classes = classes;
    for (std::size_t i = 0; i < m; ++i) inputs.features.push_back(p.ds.features[i].data);
    inputs.labels = train_labels;

    std::string source = "none";
    if (ms.gamma_b != 0.0 && m >= 2) {
        if (ms.use_ground_truth_correspondences) {
            if (!p.ds.ground_truth) {
                throw ArgumentError("classify: manifest requests ground-truth "
                                    "correspondences but provides none");
            }
            fmbsd::CorrespondenceMatrix corr;
            corr.rho = *p.ds.ground_truth;
            corr.target_count = p.ds.features[1].data.rows();
            inputs.correspondences.emplace(std::make_pair(0, 1), corr.rho);
            source = "ground-truth";
        } else {
            for (std::size_t i = 0; i < m; ++i) {
                for (std::size_t j = i + 1; j < m; ++j) {
                    const PairFit fit =
                        with_stage("correspond", [&] { return fit_pair(p, i, j); });
                    inputs.correspondences.emplace(
                        std::make_pair(static_cast<int>(i), static_cast<int>(j)),
                        fit.correspondences.rho);
                }
            }
            source = "fmbsd";
        }
    }

    m2cpc::TrainParams params;
    params.gamma_a = ms.gamma_a;
    params.gamma_w = ms.gamma_w;
    params.gamma_b = ms.gamma_b;
    params.mp_mode = ms.mp_mode;
    params.knn = p.cfg.knn;
    if (ms.kernel_width > 0.0) {
        params.widths.assign(m, ms.kernel_width);
    }

    const m2cpc::TrainedModel model =
        with_stage("classify", [&] { return m2cpc::train(inputs, params); });

    std::string report = "task: classify\n";
    report += "correspondence source: " + source + "\n";
    json jr;
    jr["task"] = "classify";
    jr["correspondence_source"] = source;
    jr["modalities"] = json::array();

    double acc_sum = 0.0;
    int acc_count = 0;
    for (std::size_t i = 0; i < m; ++i) {
        const m2cpc::Prediction pred =
            m2cpc::predict(model, p.ds.features[i].data, static_cast<int>(i));
        std::vector<std::vector<int>> rows;
        rows.reserve(pred.labels.size());
        for (int v : pred.labels) rows.push_back({v});
        io::write_label_csv(out_dir / ("predictions_" + p.ds.features[i].id + ".csv"), rows);

        // Test accuracy over samples that were unlabeled at training time and
        // have an evaluation label; falls back to the labeled samples.
        std::vector<int> eval_pred, eval_truth;
        if (p.ds.eval_labels[i]) {
            const std::vector<int> truth = single_labels(*p.ds.eval_labels[i], "classify");
            for (std::size_t r = 0; r < pred.labels.size(); ++r) {
                if (train_labels[i][r] == 0 && truth[r] != 0) {
                    eval_pred.push_back(pred.labels[r]);
                    eval_truth.push_back(truth[r]);
                }
            }
        } else {
            for (std::size_t r = 0; r < pred.labels.size(); ++r) {
                if (train_labels[i][r] != 0) {
                    eval_pred.push_back(pred.labels[r]);
                    eval_truth.push_back(train_labels[i][r]);
                }
            }
        }
        json mj;
        mj["id"] = p.ds.features[i].id;
        mj["evaluated"] = eval_pred.size();
        if (!eval_pred.empty()) {
            const double acc = metrics::accuracy(eval_pred, eval_truth);
            report += "modality " + p.ds.features[i].id + ": accuracy " + fmt(acc, 6) +
                      " over " + std::to_string(eval_pred.size()) + " evaluated samples\n";
            mj["accuracy"] = acc;
            acc_sum += acc;
            ++acc_count;
        } else {
            report += "modality " + p.ds.features[i].id + ": no evaluated samples\n";
        }
        jr["modalities"].push_back(mj);
    }
    if (acc_count > 0) {
        report += "mean accuracy: " + fmt(acc_sum / acc_count, 6) + "\n";
        jr["mean_accuracy"] = acc_sum / acc_count;
    }
    write_text(out_dir / "report.txt", report);
    write_json(out_dir / "report.json", jr);
}

} // namespace

void run(const fs::path& manifest_path, Task task, const fs::path& out_dir,
         Eigen::Index k_ret) {
    fs::create_directories(out_dir);
    const std::size_t min_modalities = task == Task::classify ? 1 : 2;
    const Prepared p = prepare(manifest_path, min_modalities);
    switch (task) {
    case Task::correspond:
        run_correspond(p, out_dir);
        break;
    case Task::retrieve:
        run_retrieve(p, out_dir, k_ret);
        break;
    case Task::classify:
        run_classify(p, out_dir);
        break;
    }
}

double eval_map(const fs::path& pred, const fs::path& truth) {
    std::ifstream pin(pred), tin(truth);
    if (!pin) throw ParseError(pred.string() + ": cannot open");
    if (!tin) throw ParseError(truth.string() + ": cannot open");

    std::vector<std::string> pred_lines, truth_lines;
    std::string line;
    while (std::getline(pin, line)) pred_lines.push_back(line);
    while (std::getline(tin, line)) truth_lines.push_back(line);
    while (!pred_lines.empty() && pred_lines.back().empty()) pred_lines.pop_back();
    while (!truth_lines.empty() && truth_lines.back().empty()) truth_lines.pop_back();
    if (pred_lines.size() != truth_lines.size()) {
        throw ArgumentError("eval: prediction and truth row counts differ");
    }

    double sum = 0.0;
    Eigen::Index admissible = 0;
    for (std::size_t q = 0; q < pred_lines.size(); ++q) {
        std::vector<int> relevant_set;
        {
            std::stringstream ss(truth_lines[q]);
            std::string cell;
            while (std::getline(ss, cell, ';')) {
                if (!cell.empty()) relevant_set.push_back(std::stoi(cell));
            }
        }
        if (relevant_set.empty()) continue;
        std::vector<int> seq;
        {
            std::stringstream ss(pred_lines[q]);
            std::string cell;
            while (std::getline(ss, cell, ',')) {
                if (cell.empty()) continue;
                const int t = std::stoi(cell);
                seq.push_back(std::find(relevant_set.begin(), relevant_set.end(), t) !=
                                      relevant_set.end()
                                  ? 1
                                  : 0);
            }
        }
        sum += metrics::average_precision(seq,
                                          static_cast<Eigen::Index>(relevant_set.size()));
        ++admissible;
    }
    if (admissible == 0) {
        throw ArgumentError("eval: no admissible queries");
    }
    return sum / static_cast<double>(admissible);
}

double eval_accuracy(const fs::path& pred, const fs::path& truth) {
    const std::vector<int> a = single_labels(io::load_label_csv(pred), "eval");
    const std::vector<int> b = single_labels(io::load_label_csv(truth), "eval");
    return metrics::accuracy(a, b);
}

} // namespace crossmap::pipeline
