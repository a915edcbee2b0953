#include <cstdio>
#include <exception>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "crossmap/pipeline.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Cross-modal correspondence, retrieval and classification toolkit"};
    app.require_subcommand(1);

    std::string spec, manifest, out_dir, pred, truth, metric;
    long long k_ret = 10;

    CLI::App* synth = app.add_subcommand("synth", "Generate a synthetic multimodal dataset");
    synth->add_option("--spec", spec, "Synthetic spec JSON")->required();
    synth->add_option("--out", out_dir, "Output directory")->required();

    CLI::App* correspond =
        app.add_subcommand("correspond", "Fit functional maps and extract correspondences");
    correspond->add_option("--manifest", manifest, "Dataset manifest JSON")->required();
    correspond->add_option("--out", out_dir, "Output directory")->required();

    CLI::App* retrieve = app.add_subcommand("retrieve", "Cross-modal retrieval with MAP scoring");
    retrieve->add_option("--manifest", manifest, "Dataset manifest JSON")->required();
    retrieve->add_option("--k", k_ret, "Ranked list length to write");
    retrieve->add_option("--out", out_dir, "Output directory")->required();

    CLI::App* classify = app.add_subcommand("classify", "Semi-supervised multimodal classification");
    classify->add_option("--manifest", manifest, "Dataset manifest JSON")->required();
    classify->add_option("--out", out_dir, "Output directory")->required();

    CLI::App* eval = app.add_subcommand("eval", "Score predictions against ground truth");
    eval->add_option("--pred", pred, "Predictions file")->required();
    eval->add_option("--truth", truth, "Ground-truth file")->required();
    eval->add_option("--metric", metric, "map or acc")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (synth->parsed()) {
            crossmap::pipeline::run_synth(spec, out_dir);
        } else if (correspond->parsed()) {
            crossmap::pipeline::run(manifest, crossmap::pipeline::Task::correspond, out_dir);
        } else if (retrieve->parsed()) {
            crossmap::pipeline::run(manifest, crossmap::pipeline::Task::retrieve, out_dir,
                                    static_cast<Eigen::Index>(k_ret));
        } else if (classify->parsed()) {
            crossmap::pipeline::run(manifest, crossmap::pipeline::Task::classify, out_dir);
        } else if (eval->parsed()) {
            double score = 0.0;
            if (metric == "map") {
                score = crossmap::pipeline::eval_map(pred, truth);
                std::printf("map %.6f\n", score);
            } else if (metric == "acc") {
                score = crossmap::pipeline::eval_accuracy(pred, truth);
                std::printf("accuracy %.6f\n", score);
            } else {
                std::cerr << "error: metric must be map or acc\n";
                return 1;
            }
        }
    } catch (const crossmap::NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
