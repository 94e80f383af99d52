// Command line front end: compile targets into models, evaluate marginals and
// conditionals, verify inference identities, and print width/depth bounds.
// Exit codes: 0 success, 2 quantitative failure (tolerance not met), 3 bad
// input or usage. Every file-producing invocation also writes a manifest next
// to its main output, and reruns with the same arguments produce byte
// identical files.

#include <cstdio>
#include <iostream>
#include <random>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "dbmc/bounds.hpp"
#include "dbmc/compiler.hpp"
#include "dbmc/distribution.hpp"
#include "dbmc/error.hpp"
#include "dbmc/inference.hpp"
#include "dbmc/io.hpp"
#include "dbmc/verify.hpp"

namespace {

std::string sibling_path(const std::string& out, const std::string& tag) {
  const std::string ext = ".json";
  if (out.size() > ext.size() && out.compare(out.size() - ext.size(), ext.size(), ext) == 0)
    return out.substr(0, out.size() - ext.size()) + "." + tag + ".json";
  return out + "." + tag + ".json";
}

void write_manifest(const std::string& main_out, const std::string& subcommand,
                    const std::vector<std::string>& args,
                    const std::vector<std::string>& outputs) {
  dbmc::json j{{"subcommand", subcommand}, {"arguments", args}, {"outputs", outputs}};
  dbmc::save_json_file(sibling_path(main_out, "manifest"), j);
}

// Exponential weights normalized to a distribution; fully determined by the seed.
dbmc::Distribution random_target(int n, int q, std::uint64_t seed) {
  dbmc::StateSpace space(n, q);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<double> p(space.size());
  double mass = 0.0;
  for (double& v : p) {
    v = -std::log1p(-unit(rng));
    mass += v;
  }
  for (double& v : p) v /= mass;
  return dbmc::Distribution(space, p);
}

std::pair<std::vector<int>, std::vector<int>> parse_clamp(const std::string& spec) {
  std::vector<int> coords, values;
  std::size_t pos = 0;
  while (pos < spec.size()) {
    std::size_t comma = spec.find(',', pos);
    if (comma == std::string::npos) comma = spec.size();
    std::string item = spec.substr(pos, comma - pos);
    std::size_t eq = item.find('=');
    if (eq == std::string::npos || eq == 0 || eq + 1 >= item.size())
      throw dbmc::parse_error("clamp entries must look like coord=value");
    try {
      coords.push_back(std::stoi(item.substr(0, eq)));
      values.push_back(std::stoi(item.substr(eq + 1)));
    } catch (const std::exception&) {
      throw dbmc::parse_error("clamp entries must be integers");
    }
    pos = comma + 1;
  }
  if (coords.empty()) throw dbmc::parse_error("empty clamp specification");
  return {coords, values};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"exact construction of deep Boltzmann machines for small targets"};
  app.require_subcommand(1);
  std::vector<std::string> args(argv + 1, argv + argc);

  std::string target_path, model_path, out_path, clamp_spec;
  int width = 0, alphabet = 2, layer = 0;
  std::uint64_t seed = 1;
  dbmc::CompileConfig cfg;
  double verify_tol = 1e-8;

  CLI::App* c = app.add_subcommand("compile", "build a model for a target distribution");
  c->add_option("--target", target_path, "target distribution JSON");
  c->add_option("--width", width, "units for a generated target (needs --seed)");
  c->add_option("--alphabet", alphabet, "alphabet size of a generated target");
  c->add_option("--seed", seed, "seed for the generated target");
  c->add_option("--tolerance", cfg.tolerance, "KL divergence to reach");
  c->add_option("--beta0", cfg.beta0, "initial sharpness scale");
  c->add_option("--max-beta", cfg.max_beta, "largest sharpness scale tried");
  c->add_option("--smoothing", cfg.smoothing, "uniform mix-in; default picks automatically");
  c->add_option("--out", out_path, "model output path")->required();

  CLI::App* e = app.add_subcommand("eval", "marginal or clamped conditional of a model");
  e->add_option("--model", model_path, "model JSON")->required();
  e->add_option("--layer", layer, "layer whose marginal to compute");
  e->add_option("--clamp", clamp_spec, "visible clamps coord=value[,coord=value...], 0-based");
  e->add_option("--out", out_path, "distribution output path; stdout if absent");

  CLI::App* v = app.add_subcommand("verify", "check inference identities on a model");
  v->add_option("--model", model_path, "model JSON")->required();
  v->add_option("--seed", seed, "seed for random interface splits");
  v->add_option("--tolerance", verify_tol, "largest acceptable deviation");
  v->add_option("--out", out_path, "report output path; stdout if absent");

  CLI::App* b = app.add_subcommand("bounds", "width and depth bounds for a unit count");
  b->add_option("--width", width, "visible units")->required();
  b->add_option("--alphabet", alphabet, "alphabet size");
  b->add_option("--out", out_path, "report output path; stdout if absent");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& ex) {
    int code = app.exit(ex);
    return code == 0 ? 0 : 3;
  }

  try {
    if (c->parsed()) {
      dbmc::Distribution target = [&] {
        if (!target_path.empty())
          return dbmc::distribution_from_json(dbmc::load_json_file(target_path));
        if (width < 1)
          throw dbmc::parse_error("compile needs --target or --width with --seed");
        return random_target(width, alphabet, seed);
      }();
      dbmc::CompileResult result = dbmc::compile(target, cfg);
      std::vector<std::string> outputs{out_path, sibling_path(out_path, "certificate")};
      dbmc::save_json_file(out_path, dbmc::to_json(result.model));
      dbmc::save_json_file(outputs[1], dbmc::to_json(result.certificate));
      if (target_path.empty()) {
        outputs.push_back(sibling_path(out_path, "target"));
        dbmc::save_json_file(outputs.back(), dbmc::to_json(target));
      }
      write_manifest(out_path, "compile", args, outputs);
      std::cout << dbmc::to_json(result.certificate).dump(2) << '\n';
      return result.certificate.converged ? 0 : 2;
    }

    if (e->parsed()) {
      dbmc::DbmParams m = dbmc::model_from_json(dbmc::load_json_file(model_path));
      if (!clamp_spec.empty()) {
        auto [coords, values] = parse_clamp(clamp_spec);
        m = dbmc::clamp_visible(m, coords, values);
      }
      if (layer < 0 || layer > m.depth())
        throw dbmc::dimension_error("layer index out of range");
      dbmc::Distribution marg = dbmc::layer_marginal(m, layer);
      dbmc::json j = dbmc::to_json(marg);
      if (out_path.empty()) {
        std::cout << j.dump(2) << '\n';
      } else {
        dbmc::save_json_file(out_path, j);
        write_manifest(out_path, "eval", args, {out_path});
      }
      return 0;
    }

    if (v->parsed()) {
      dbmc::DbmParams m = dbmc::model_from_json(dbmc::load_json_file(model_path));
      dbmc::VerifyOptions opt;
      opt.seed = seed;
      dbmc::VerifyReport rep = dbmc::run_verification(m, opt);
      dbmc::json j{{"oracle_checked", rep.oracle_checked},
                   {"log_partition_dev", rep.log_partition_dev},
                   {"marginal_dev", rep.marginal_dev},
                   {"partition_consistency", rep.partition_consistency},
                   {"chain_rule_dev", rep.chain_rule_dev},
                   {"composition_dev", rep.composition_dev},
                   {"factorization_dev", rep.factorization_dev},
                   {"max_dev", rep.max_dev()},
                   {"tolerance", verify_tol}};
      if (out_path.empty()) {
        std::cout << j.dump(2) << '\n';
      } else {
        dbmc::save_json_file(out_path, j);
        write_manifest(out_path, "verify", args, {out_path});
      }
      return rep.max_dev() <= verify_tol ? 0 : 2;
    }

    // bounds
    dbmc::json j = dbmc::to_json(dbmc::bounds_report(width, alphabet));
    if (out_path.empty()) {
      std::cout << j.dump(2) << '\n';
    } else {
      dbmc::save_json_file(out_path, j);
      write_manifest(out_path, "bounds", args, {out_path});
    }
    return 0;
  } catch (const dbmc::error& ex) {
    std::cerr << "error: " << ex.what() << '\n';
    return 3;
  } catch (const std::exception& ex) {
    std::cerr << "error: " << ex.what() << '\n';
    return 3;
  }
}
