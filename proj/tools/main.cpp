#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "varint.h"

namespace {

int log_level() {
  const char* env = std::getenv("VARINT_LOG");
  if (!env) return 0;
  if (std::strcmp(env, "debug") == 0) return 2;
  if (std::strcmp(env, "info") == 0) return 1;
  return 0;
}

void report_failure(int code) {
  const char* err = varint_last_error();
  if (err && err[0]) {
    std::fprintf(stderr, "%s\n", err);
  } else {
    std::fprintf(stderr, "{\"error\": {\"code\": %d}}\n", code);
  }
}

int cmd_run(const std::string& config_path) {
  if (log_level() >= 1) std::fprintf(stderr, "running config %s\n", config_path.c_str());
  const int code = varint_run(config_path.c_str());
  if (code != VARINT_OK) report_failure(code);
  return code;
}

int cmd_filon_weights(int points, double theta) {
  std::vector<double> re(points), im(points);
  const int code = varint_filon_weights(points, theta, re.data(), im.data());
  if (code != VARINT_OK) {
    report_failure(code);
    return code;
  }
  for (int i = 0; i < points; ++i) std::printf("%.17g,%.17g\n", re[i], im[i]);
  return VARINT_OK;
}

int cmd_diagnose(const std::string& csv_path) {
  varint_summary* summary = nullptr;
  const int code = varint_diagnose(csv_path.c_str(), &summary);
  if (code != VARINT_OK) {
    report_failure(code);
    return code;
  }
  std::printf("%s\n", varint_summary_json(summary));
  varint_summary_free(summary);
  return VARINT_OK;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"variational integrator harness"};
  app.require_subcommand(1);

  std::string config_path;
  auto* run = app.add_subcommand("run", "execute a JSON run configuration");
  run->add_option("config", config_path, "path to config.json")->required();

  int points = 3;
  double theta = 0.0;
  auto* filon = app.add_subcommand("filon-weights", "print Filon quadrature weights");
  filon->add_option("--points", points, "number of Lobatto nodes")->required();
  filon->add_option("--theta", theta, "oscillation parameter h*omega")->required();

  std::string csv_path;
  auto* diagnose = app.add_subcommand("diagnose", "conservation diagnostics of a trajectory CSV");
  diagnose->add_option("trajectory", csv_path, "path to trajectory csv")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& err) {
    const int code = app.exit(err);
    return code == 0 ? 0 : VARINT_ERR_CONFIG;
  }

  if (run->parsed()) return cmd_run(config_path);
  if (filon->parsed()) return cmd_filon_weights(points, theta);
  return cmd_diagnose(csv_path);
}
