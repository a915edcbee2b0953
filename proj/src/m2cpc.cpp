#include "crossmap/m2cpc.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "crossmap/graph_spectral.hpp"
#include "crossmap/kernels.hpp"
#include "crossmap/numkit.hpp"

namespace crossmap::m2cpc {

LabelEncoding encode_labels(const std::vector<std::vector<int>>& labels, int classes) {
    if (classes < 2) {
        throw ArgumentError("encode_labels: need at least two classes");
    }
    LabelEncoding enc;
    enc.classes = classes;

    Eigen::Index total = 0;
    for (const auto& modality : labels) total += static_cast<Eigen::Index>(modality.size());
    enc.y = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(classes) * total);

    Eigen::Index block = 0; // sample offset across modalities
    for (const auto& modality : labels) {
        const Eigen::Index n = static_cast<Eigen::Index>(modality.size());
        std::vector<Eigen::Index> order;
        order.reserve(static_cast<std::size_t>(n));
        for (Eigen::Index j = 0; j < n; ++j) {
            const int lab = modality[static_cast<std::size_t>(j)];
            if (lab < 0 || lab > classes) {
                throw ArgumentError("encode_labels: label " + std::to_string(lab) +
                                    " out of range 1.." + std::to_string(classes));
            }
            if (lab != 0) order.push_back(j);
        }
        const Eigen::Index labeled = static_cast<Eigen::Index>(order.size());
        for (Eigen::Index j = 0; j < n; ++j) {
            if (modality[static_cast<std::size_t>(j)] == 0) order.push_back(j);
        }

        for (Eigen::Index pos = 0; pos < labeled; ++pos) {
            const int lab = modality[static_cast<std::size_t>(order[pos])];
            const Eigen::Index base = (block + pos) * classes;
            for (int ch = 0; ch < classes; ++ch) {
                enc.y(base + ch) = ch + 1 == lab ? 1.0 : -1.0;
            }
        }

        enc.labeled_counts.push_back(labeled);
        enc.sample_counts.push_back(n);
        enc.order.push_back(std::move(order));
        block += n;
    }
    return enc;
}

Eigen::VectorXd build_J(const std::vector<Eigen::Index>& labeled,
                        const std::vector<Eigen::Index>& counts, int classes) {
    if (labeled.size() != counts.size()) {
        throw ArgumentError("build_J: modality counts differ");
    }
    Eigen::Index total = 0;
    for (std::size_t i = 0; i < counts.size(); ++i) {
        if (labeled[i] < 0 || labeled[i] > counts[i]) {
            throw ArgumentError("build_J: labeled count exceeds sample count");
        }
        total += counts[i];
    }
    Eigen::VectorXd diag = Eigen::VectorXd::Zero(total * classes);
    Eigen::Index block = 0;
    for (std::size_t i = 0; i < counts.size(); ++i) {
        diag.segment(block * classes, labeled[i] * classes).setOnes();
        block += counts[i];
    }
    return diag;
}

Eigen::MatrixXd build_MP(
    const std::map<std::pair<int, int>, fmbsd::CorrespondenceMatrix>& correspondences,
    const std::vector<Eigen::Index>& counts, MpMode mode) {
    const int m = static_cast<int>(counts.size());
    std::vector<Eigen::Index> offset(counts.size() + 1, 0);
    for (std::size_t i = 0; i < counts.size(); ++i) offset[i + 1] = offset[i] + counts[i];
    const Eigen::Index n = offset.back();

    Eigen::MatrixXd mp = Eigen::MatrixXd::Zero(n, n);
    for (const auto& [pair, corr] : correspondences) {
        const auto [j, k] = pair;
        if (j < 0 || k <= j || k >= m) {
            throw ArgumentError("build_MP: correspondence pair indices out of order");
        }
        if (corr.rho.size() != counts[static_cast<std::size_t>(j)] ||
            corr.target_count != counts[static_cast<std::size_t>(k)]) {
            throw ArgumentError("build_MP: correspondence shape mismatch for pair " +
                                std::to_string(j) + "," + std::to_string(k));
        }
        for (Eigen::Index r = 0; r < corr.rho.size(); ++r) {
            if (corr.rho(r) < 0 || corr.rho(r) >= corr.target_count) {
                throw ArgumentError("build_MP: correspondence target out of range");
            }
        }
        if (mode == MpMode::laplacian_exact) {
            for (Eigen::Index r = 0; r < corr.rho.size(); ++r) {
                const Eigen::Index a = offset[static_cast<std::size_t>(j)] + r;
                const Eigen::Index b = offset[static_cast<std::size_t>(k)] + corr.rho(r);
                mp(a, a) += 1.0;
                mp(b, b) += 1.0;
                mp(a, b) -= 1.0;
                mp(b, a) -= 1.0;
            }
        } else {
            for (Eigen::Index r = 0; r < corr.rho.size(); ++r) {
                const Eigen::Index a = offset[static_cast<std::size_t>(j)] + r;
                const Eigen::Index b = offset[static_cast<std::size_t>(k)] + corr.rho(r);
                mp(a, b) -= 1.0;
                mp(b, a) -= 1.0;
            }
        }
    }
    if (mode == MpMode::paper_verbatim) {
        for (std::size_t i = 0; i < counts.size(); ++i) {
            mp.block(offset[i], offset[i], counts[i], counts[i]).diagonal().array() +=
                static_cast<double>(m - 1);
        }
    }
    return mp;
}

Eigen::MatrixXd kron_identity(const Eigen::MatrixXd& m, int c) {
    if (c < 1) {
        throw ArgumentError("kron_identity: class count must be positive");
    }
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(m.rows() * c, m.cols() * c);
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        for (Eigen::Index t = 0; t < m.cols(); ++t) {
            const double v = m(r, t);
            if (v == 0.0) continue;
            for (int d = 0; d < c; ++d) {
                out(r * c + d, t * c + d) = v;
            }
        }
    }
    return out;
}

Eigen::MatrixXd build_MW(const std::vector<Eigen::MatrixXd>& laplacians, int classes) {
    Eigen::Index n = 0;
    for (const auto& l : laplacians) {
        if (l.rows() != l.cols()) {
            throw ArgumentError("build_MW: Laplacian blocks must be square");
        }
        n += l.rows();
    }
    Eigen::MatrixXd block = Eigen::MatrixXd::Zero(n, n);
    Eigen::Index at = 0;
    for (const auto& l : laplacians) {
        block.block(at, at, l.rows(), l.rows()) = l;
        at += l.rows();
    }
    return kron_identity(block, classes);
}

Eigen::MatrixXd gaussian_gram(const Eigen::MatrixXd& x, double width) {
    if (!(width > 0.0)) {
        throw ArgumentError("gaussian_gram: kernel width must be positive");
    }
    return kernels::gaussian_affinity(kernels::pairwise_sq_dists(x, x),
                                      2.0 * width * width);
}

Eigen::MatrixXd gram(const std::vector<Eigen::MatrixXd>& features, const KernelSpec& spec,
                     int classes) {
    if (features.size() != spec.widths.size()) {
        throw ArgumentError("gram: need one kernel width per modality");
    }
    Eigen::Index n = 0;
    for (const auto& f : features) {
        if (!f.allFinite()) throw ArgumentError("gram: features must be finite");
        n += f.rows();
    }
    Eigen::MatrixXd k = Eigen::MatrixXd::Zero(n, n);
    Eigen::Index at = 0;
    for (std::size_t i = 0; i < features.size(); ++i) {
        const Eigen::Index ni = features[i].rows();
        k.block(at, at, ni, ni) = gaussian_gram(features[i], spec.widths[i]);
        at += ni;
    }
    return kron_identity(k, classes);
}

TrainedModel fit(const LabelEncoding& encoding, const Eigen::VectorXd& j_diag,
                 const Eigen::MatrixXd& g, const Eigen::MatrixXd& mw,
                 const Eigen::MatrixXd& mb, double gamma_a, double gamma_w, double gamma_b,
                 std::vector<Eigen::MatrixXd> features, KernelSpec kernel) {
    const Eigen::Index cn = encoding.y.size();
    if (j_diag.size() != cn || g.rows() != cn || g.cols() != cn) {
        throw ArgumentError("fit: operator sizes do not match the encoding");
    }
    if (gamma_w != 0.0 && (mw.rows() != cn || mw.cols() != cn)) {
        throw ArgumentError("fit: M_W size mismatch");
    }
    if (gamma_b != 0.0 && (mb.rows() != cn || mb.cols() != cn)) {
        throw ArgumentError("fit: M_B size mismatch");
    }

    const double l = static_cast<double>(
        std::accumulate(encoding.labeled_counts.begin(), encoding.labeled_counts.end(),
                        Eigen::Index{0}));
    // Without ambient regularization the system is only guaranteed solvable
    // when the loss mask has full rank (every sample labeled).
    if (!(gamma_a > 0.0)) {
        for (std::size_t i = 0; i < encoding.labeled_counts.size(); ++i) {
            if (encoding.labeled_counts[i] < encoding.sample_counts[i]) {
                throw ArgumentError(
                    "fit: gamma_a must be positive when unlabeled samples are present");
            }
        }
    }

    Eigen::MatrixXd b = j_diag.asDiagonal() * g;
    b.diagonal().array() += 2.0 * l * gamma_a;
    if (gamma_w != 0.0) {
        b += gamma_w * 0.5 * ((mw.transpose() + mw) * g);
    }
    if (gamma_b != 0.0) {
        b += gamma_b * 0.5 * ((mb.transpose() + mb) * g);
    }

    TrainedModel model;
    model.a = numkit::solve(b, encoding.y);
    model.train_features = std::move(features);
    model.kernel = std::move(kernel);
    model.classes = encoding.classes;
    model.gamma_a = gamma_a;
    model.gamma_w = gamma_w;
    model.gamma_b = gamma_b;
    model.order = encoding.order;
    model.sample_counts = encoding.sample_counts;
    return model;
}

Prediction predict(const TrainedModel& model, const Eigen::MatrixXd& test, int modality) {
    if (modality < 0 || modality >= static_cast<int>(model.train_features.size())) {
        throw ArgumentError("predict: modality index out of range");
    }
    const Eigen::MatrixXd& train = model.train_features[static_cast<std::size_t>(modality)];
    if (test.cols() != train.cols()) {
        throw ArgumentError("predict: test feature dimension mismatch");
    }
    const double width = model.kernel.widths[static_cast<std::size_t>(modality)];
    const Eigen::MatrixXd ktest = kernels::gaussian_affinity(
        kernels::pairwise_sq_dists(test, train), 2.0 * width * width);

    Eigen::Index offset = 0;
    for (int i = 0; i < modality; ++i) {
        offset += model.sample_counts[static_cast<std::size_t>(i)];
    }
    const int c = model.classes;
    const Eigen::Index ni = train.rows();
    // Coefficient block of this modality reshaped to one row per training
    // sample; scores follow as a single product with the test kernel.
    Eigen::MatrixXd coeff(ni, c);
    for (Eigen::Index t = 0; t < ni; ++t) {
        for (int ch = 0; ch < c; ++ch) {
            coeff(t, ch) = model.a((offset + t) * c + ch);
        }
    }

    Prediction out;
    out.scores = ktest * coeff;
    out.labels.resize(static_cast<std::size_t>(test.rows()));
    for (Eigen::Index j = 0; j < test.rows(); ++j) {
        int best = 0;
        for (int ch = 1; ch < c; ++ch) {
            if (out.scores(j, ch) > out.scores(j, best)) best = ch;
        }
        out.labels[static_cast<std::size_t>(j)] = best + 1;
    }
    return out;
}

double median_width(const Eigen::MatrixXd& x) {
    const Eigen::MatrixXd d2 = kernels::pairwise_sq_dists(x, x);
    std::vector<double> vals;
    vals.reserve(static_cast<std::size_t>(x.rows() * (x.rows() - 1) / 2));
    for (Eigen::Index r = 0; r < d2.rows(); ++r) {
        for (Eigen::Index t = r + 1; t < d2.cols(); ++t) {
            vals.push_back(d2(r, t));
        }
    }
    if (vals.empty()) return 1.0;
    std::nth_element(vals.begin(), vals.begin() + vals.size() / 2, vals.end());
    const double med = vals[vals.size() / 2];
    return med > 0.0 ? std::sqrt(med) : 1.0;
}

TrainedModel train(const TrainInputs& inputs, const TrainParams& params) {
    const std::size_t m = inputs.features.size();
    if (m == 0 || inputs.labels.size() != m) {
        throw ArgumentError("train: need matching features and labels per modality");
    }
    for (std::size_t i = 0; i < m; ++i) {
        if (static_cast<Eigen::Index>(inputs.labels[i].size()) != inputs.features[i].rows()) {
            throw ArgumentError("train: label count differs from sample count");
        }
    }

    LabelEncoding enc = encode_labels(inputs.labels, inputs.classes);

    // Reorder samples labeled-first; correspondences follow the same maps.
    std::vector<Eigen::MatrixXd> reordered(m);
    std::vector<std::vector<Eigen::Index>> position(m); // original row -> new position
    for (std::size_t i = 0; i < m; ++i) {
        const auto& order = enc.order[i];
        reordered[i].resize(inputs.features[i].rows(), inputs.features[i].cols());
        position[i].resize(order.size());
        for (std::size_t p = 0; p < order.size(); ++p) {
            reordered[i].row(static_cast<Eigen::Index>(p)) = inputs.features[i].row(order[p]);
            position[i][static_cast<std::size_t>(order[p])] = static_cast<Eigen::Index>(p);
        }
    }

    std::map<std::pair<int, int>, fmbsd::CorrespondenceMatrix> remapped;
    for (const auto& [pair, rho] : inputs.correspondences) {
        const auto [j, k] = pair;
        if (j < 0 || k <= j || k >= static_cast<int>(m)) {
            throw ArgumentError("train: correspondence pair indices out of order");
        }
        fmbsd::CorrespondenceMatrix corr;
        corr.target_count = inputs.features[static_cast<std::size_t>(k)].rows();
        corr.rho.resize(rho.size());
        for (Eigen::Index r = 0; r < rho.size(); ++r) {
            if (rho(r) < 0 || rho(r) >= corr.target_count) {
                throw ArgumentError("train: correspondence target out of range");
            }
            corr.rho(position[static_cast<std::size_t>(j)][static_cast<std::size_t>(r)]) =
                static_cast<int>(
                    position[static_cast<std::size_t>(k)][static_cast<std::size_t>(rho(r))]);
        }
        remapped.emplace(pair, std::move(corr));
    }

    std::vector<Eigen::MatrixXd> laplacians;
    laplacians.reserve(m);
    for (std::size_t i = 0; i < m; ++i) {
        const int k = std::min<int>(params.knn,
                                    static_cast<int>(reordered[i].rows()) - 1);
        graph::FeatureMatrix fm{"", reordered[i]};
        const graph::NeighborGraph g = graph::build_knn_graph(fm, k);
        laplacians.push_back(
            graph::laplacian(g, graph::LaplacianFlavor::combinatorial).matrix);
    }

    KernelSpec kernel;
    if (params.widths.empty()) {
        for (std::size_t i = 0; i < m; ++i) kernel.widths.push_back(median_width(reordered[i]));
    } else if (params.widths.size() == m) {
        kernel.widths = params.widths;
    } else {
        throw ArgumentError("train: need one kernel width per modality");
    }

    const Eigen::MatrixXd g = gram(reordered, kernel, inputs.classes);
    const Eigen::MatrixXd mw =
        params.gamma_w != 0.0 ? build_MW(laplacians, inputs.classes) : Eigen::MatrixXd();
    const Eigen::MatrixXd mb =
        params.gamma_b != 0.0
            ? kron_identity(build_MP(remapped, enc.sample_counts, params.mp_mode),
                            inputs.classes)
            : Eigen::MatrixXd();
    const Eigen::VectorXd j_diag =
        build_J(enc.labeled_counts, enc.sample_counts, inputs.classes);

    return fit(enc, j_diag, g, mw, mb, params.gamma_a, params.gamma_w, params.gamma_b,
               std::move(reordered), std::move(kernel));
}

} // namespace crossmap::m2cpc
