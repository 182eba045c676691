#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "pme/pipeline.hpp"

namespace fs = std::filesystem;

namespace
{

// Shared options: a preset or a config file, with optional overrides.
struct ConfigArgs
{
  std::string preset;
  std::string config_file;
  long long samples = -1;
  long long seed = -1;
  long long opt_seed = -1;

  pme::PipelineConfig resolve() const
  {
    pme::PipelineConfig config;
    if (!config_file.empty())
    {
      config = pme::PipelineConfig::from_json(pme::io::read_json(config_file));
    }
    else if (!preset.empty())
    {
      config = pme::PipelineConfig::preset(preset);
    }
    else
    {
      throw pme::ValidationError("either --preset or --config is required");
    }
    if (samples >= 0)
    {
      config.samples = samples;
    }
    if (seed >= 0)
    {
      config.seed = static_cast<std::uint64_t>(seed);
    }
    if (opt_seed >= 0)
    {
      config.pso.seed = static_cast<std::uint64_t>(opt_seed);
    }
    return config;
  }
};

void add_config_options(CLI::App* cmd, ConfigArgs& args)
{
  cmd->add_option("--preset", args.preset, "built-in study: airfoil-bezier14 or hull-ffd22");
  cmd->add_option("--config", args.config_file, "pipeline config JSON file");
  cmd->add_option("--samples", args.samples, "override Monte Carlo sample count");
  cmd->add_option("--seed", args.seed, "override sampling seed");
  cmd->add_option("--opt-seed", args.opt_seed, "override optimizer seed");
}

}  // namespace

int main(int argc, char** argv)
{
  CLI::App app{"Design-space dimensionality reduction with a design-variable embedding:\n"
               "samples shape modifications, solves the weighted PCA eigenproblem, embeds\n"
               "the original parameters in the latent space, and optimizes in original,\n"
               "modal, or embedded coordinates."};
  app.require_subcommand(1);

  // sample
  ConfigArgs sample_args;
  std::string sample_out = "out";
  CLI::App* sample = app.add_subcommand("sample", "draw designs and build the snapshot archive");
  add_config_options(sample, sample_args);
  sample->add_option("--out", sample_out, "output root directory");

  // reduce
  std::string reduce_archive;
  std::string reduce_out = "out";
  double reduce_confidence = 0.95;
  CLI::App* reduce = app.add_subcommand("reduce", "solve the modal basis from a snapshot archive");
  reduce->add_option("--archive", reduce_archive, "snapshot archive directory")->required();
  reduce->add_option("--confidence", reduce_confidence, "retained variance level in (0,1]");
  reduce->add_option("--out", reduce_out, "output root directory");

  // embed
  std::string embed_archive;
  std::string embed_basis;
  std::string embed_out = "out";
  CLI::App* embed = app.add_subcommand("embed", "build the design-variable embedding");
  embed->add_option("--archive", embed_archive, "snapshot archive directory")->required();
  embed->add_option("--basis", embed_basis, "basis archive directory")->required();
  embed->add_option("--out", embed_out, "output root directory");

  // optimize
  ConfigArgs opt_args;
  std::string opt_space = "pme";
  std::string opt_archive;
  std::string opt_basis;
  std::string opt_embedding;
  std::string opt_out = "out";
  CLI::App* optimize = app.add_subcommand("optimize", "run the swarm optimizer in one space");
  add_config_options(optimize, opt_args);
  optimize->add_option("--space", opt_space, "original | kle | pme");
  optimize->add_option("--archive", opt_archive, "snapshot archive directory")->required();
  optimize->add_option("--basis", opt_basis, "basis archive directory")->required();
  optimize->add_option("--embedding", opt_embedding, "embedding archive directory")->required();
  optimize->add_option("--out", opt_out, "output root directory");

  // report
  std::vector<std::string> report_runs;
  std::string report_out = "out/report";
  CLI::App* report = app.add_subcommand("report", "compare optimization runs");
  report->add_option("--runs", report_runs, "run archive directories")->required();
  report->add_option("--out", report_out, "report output directory");

  CLI11_PARSE(app, argc, argv);

  try
  {
    if (sample->parsed())
    {
      pme::cmd_sample(sample_args.resolve(), sample_out, std::cout);
    }
    else if (reduce->parsed())
    {
      pme::cmd_reduce(reduce_archive, reduce_confidence, reduce_out, std::cout);
    }
    else if (embed->parsed())
    {
      pme::cmd_embed(embed_archive, embed_basis, embed_out, std::cout);
    }
    else if (optimize->parsed())
    {
      pme::cmd_optimize(opt_args.resolve(), pme::search_space_from_string(opt_space),
                        opt_archive, opt_basis, opt_embedding, opt_out, std::cout);
    }
    else if (report->parsed())
    {
      std::vector<fs::path> dirs(report_runs.begin(), report_runs.end());
      pme::cmd_report(dirs, report_out, std::cout);
    }
  }
  catch (const pme::ValidationError& e)
  {
    std::cerr << "validation error: " << e.what() << "\n";
    return 2;
  }
  catch (const std::exception& e)
  {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
