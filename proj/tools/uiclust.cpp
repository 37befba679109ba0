// Command-line front end: gen, chunk, run, eval, resume.

#include "uiclust/commands.hpp"

#include <CLI11.hpp>

#include <iostream>

namespace {

using namespace uiclust;

void report_run(const cli::RunOutcome& out)
{
    std::cout << "metrics: " << out.metrics_path.string() << "\n";
    std::cout << "series:  " << out.series_path.string() << "\n";
    if (out.snapshot_path) std::cout << "snapshot: " << out.snapshot_path->string() << "\n";
    std::cout << "clusters per timestamp:";
    for (const auto& s : out.report.steps) std::cout << " " << io::format_double(s.cluster_count);
    std::cout << "\n";
    if (out.report.mean_entropy) std::cout << "mean entropy: " << *out.report.mean_entropy << "\n";
    std::cout << "mean SSE: " << out.report.mean_sse << "\n";
    std::cout << "total runtime: " << out.report.total_runtime_seconds << " s\n";
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Incremental stream clustering with concept-drift handling"};
    app.set_version_flag("--version", std::string(uiclust::version));
    app.require_subcommand(1);

    cli::GenOptions gen;
    auto* gen_cmd = app.add_subcommand("gen", "Generate a synthetic benchmark stream");
    gen_cmd->add_option("stream", gen.stream, "sdwcd, sdccl, 100ncd, 1000wcd or a JSON spec file")->required();
    gen_cmd->add_option("--seed", gen.seed, "generator seed")->capture_default_str();
    gen_cmd->add_option("--out", gen.out, "output directory")->required();

    cli::ChunkOptions chunk;
    std::string delimiter, binning = "equal-frequency", drifts;
    bool no_normalize = false;
    auto* chunk_cmd = app.add_subcommand("chunk", "Split a labelled dataset file into a stream");
    chunk_cmd->add_option("dataset", chunk.dataset, "delimiter-separated file, class label last")->required()->check(CLI::ExistingFile);
    chunk_cmd->add_option("--chunks", chunk.chunks, "number of chunks")->capture_default_str();
    chunk_cmd->add_flag("--no-normalize", no_normalize, "keep raw attribute values");
    chunk_cmd->add_flag("--artificial-classes", chunk.artificial_classes, "add one binned class column per attribute");
    chunk_cmd->add_option("--bins", chunk.bins, "bins per attribute (default: number of classes)");
    chunk_cmd->add_option("--binning", binning, "equal-frequency or equal-width")
        ->check(CLI::IsMember({"equal-frequency", "equal-width"}))
        ->capture_default_str();
    chunk_cmd->add_option("--delimiter", delimiter, "field delimiter (default: ';' if present, else ',')");
    chunk_cmd->add_option("--drift", drifts, "label drift schedule, e.g. 3:temporary,6:sustained");
    chunk_cmd->add_option("--seed", chunk.seed, "seed for the label permutations")->capture_default_str();
    chunk_cmd->add_option("--name", chunk.name, "stream name (default: file stem)");
    chunk_cmd->add_option("--out", chunk.out, "output directory")->required();

    cli::RunConfig run;
    auto* run_cmd = app.add_subcommand("run", "Run the engine over a stream and write metrics");
    run_cmd->add_option("manifest", run.manifest, "stream manifest.json")->required();
    run_cmd->add_option("--k", run.k, "fixed cluster count (default: distinct labels per chunk)");
    run_cmd->add_option("--o-thresh", run.o_thresh, "outlier ratio threshold (default 0.18)");
    run_cmd->add_option("--d-thresh", run.d_thresh, "distribution change threshold (default 0.6, 0.4 for real-world streams)");
    run_cmd->add_option("--seed", run.seed, "engine seed; repeat i uses seed+i")->capture_default_str();
    run_cmd->add_option("--max-iterations", run.max_iterations, "k-means iteration cap")->capture_default_str();
    run_cmd->add_option("--repeat", run.repeat, "number of runs to average")->capture_default_str();
    run_cmd->add_flag("--parallel", run.parallel, "run repeats on separate threads");
    run_cmd->add_option("--out", run.out, "output directory")->required();
    run_cmd->add_option("--snapshot", run.snapshot, "write the final engine state here");
    run_cmd->add_option("--stop-after", run.stop_after, "stop after this timestamp");

    std::string eval_manifest, eval_metrics;
    auto* eval_cmd = app.add_subcommand("eval", "Compare final centroids with the true class means");
    eval_cmd->add_option("manifest", eval_manifest, "stream manifest.json")->required();
    eval_cmd->add_option("metrics", eval_metrics, "metrics.jsonl written by run")->required();

    cli::ResumeOptions resume;
    auto* resume_cmd = app.add_subcommand("resume", "Continue a run from a snapshot");
    resume_cmd->add_option("snapshot", resume.snapshot, "snapshot written by run --snapshot")->required();
    resume_cmd->add_option("--out", resume.out, "output directory (default: the original one)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (*gen_cmd) {
            std::cout << cli::cmd_gen(gen).string() << "\n";
        } else if (*chunk_cmd) {
            chunk.normalize = !no_normalize;
            chunk.drifts = cli::parse_drift_schedule(drifts);
            chunk.binning = binning == "equal-width" ? BinningMethod::EqualWidth : BinningMethod::EqualFrequency;
            if (!delimiter.empty()) {
                if (delimiter == "\\t" || delimiter == "tab") delimiter = "\t";
                if (delimiter.size() != 1) throw UsageError("--delimiter must be a single character");
                chunk.delimiter = delimiter.front();
            }
            std::cout << cli::cmd_chunk(chunk).string() << "\n";
        } else if (*run_cmd) {
            report_run(cli::cmd_run(run));
        } else if (*eval_cmd) {
            cli::cmd_eval(eval_manifest, eval_metrics, std::cout);
        } else if (*resume_cmd) {
            report_run(cli::cmd_resume(resume));
        }
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
