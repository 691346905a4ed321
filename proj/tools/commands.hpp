#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <variant>

#include "ralmkit/bench.hpp"
#include "ralmkit/ralm.hpp"

namespace ralmkit::cli {

// Bad or missing config entry; the message starts with the dotted field path.
class ConfigError : public Error {
 public:
  using Error::Error;
};

struct CmBlock {
  CmInstance instance;
};

struct RmcBlock {
  RmcInstance instance;
};

struct RunConfig {
  std::filesystem::path base_dir;
  std::variant<CmBlock, RmcBlock> problem;
  RalmConfig solver;

  // Initial point: a CSV file, otherwise a seeded random point.
  std::optional<std::filesystem::path> init_point;
  std::optional<std::filesystem::path> init_multiplier;
  // Moves the initial point along a seeded random unit tangent.
  double init_perturb = 0.0;

  double certify_rho = 10.0;
  bool certify_enumerate = true;
  double stationarity_tol = 1e-6;

  std::optional<std::filesystem::path> log_path;
  std::optional<std::filesystem::path> plot_path;
  std::optional<std::filesystem::path> point_out;
  std::optional<std::filesystem::path> multiplier_out;
  std::uint64_t seed = 1;
};

RunConfig parse_run_config(const std::string& json_text,
                           const std::filesystem::path& base_dir);
RunConfig load_run_config(const std::filesystem::path& path);

Problem build_problem(const RunConfig& cfg);
double theta_weight(const RunConfig& cfg);

// Reads RALMKIT_LOG_LEVEL and routes the default logger to stderr.
void init_logging();

int cmd_solve(const std::filesystem::path& config,
              std::optional<std::uint64_t> seed, std::ostream& out,
              std::ostream& err);
int cmd_certify(const std::filesystem::path& config,
                const std::filesystem::path& point,
                const std::filesystem::path& multiplier, std::ostream& out,
                std::ostream& err);
int cmd_rate(const std::filesystem::path& log, double tail_fraction,
             std::ostream& out, std::ostream& err);
int cmd_gradcheck(const std::filesystem::path& config, int samples,
                  std::optional<std::uint64_t> seed, std::ostream& out,
                  std::ostream& err);

}  // namespace ralmkit::cli
