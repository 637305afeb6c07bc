#include "varint.h"

#include <string>

#include "varint/diagnostics.hpp"
#include "varint/multiscale.hpp"
#include "varint/numcore.hpp"
#include "varint/runner.hpp"

namespace {

thread_local std::string g_last_error;

int record_error(int code, const std::string& field, const std::string& message) {
  g_last_error = varint::error_json(code, field, message);
  return code;
}

template <typename Fn>
int guarded(Fn&& fn) {
  g_last_error.clear();
  try {
    fn();
    return VARINT_OK;
  } catch (const varint::ConfigError& err) {
    return record_error(VARINT_ERR_CONFIG, err.field(), err.what());
  } catch (const std::invalid_argument& err) {
    return record_error(VARINT_ERR_CONFIG, "", err.what());
  } catch (const varint::SolverError& err) {
    return record_error(VARINT_ERR_SOLVER, "", err.what());
  } catch (const varint::IoError& err) {
    return record_error(VARINT_ERR_IO, "", err.what());
  } catch (const std::exception& err) {
    return record_error(VARINT_ERR_IO, "", err.what());
  }
}

}  // namespace

struct varint_summary {
  std::string json;
};

extern "C" {

int varint_run(const char* config_path) {
  if (!config_path) return record_error(VARINT_ERR_CONFIG, "config", "null path");
  return guarded([&] { varint::run_to_files(varint::RunConfig::from_file(config_path)); });
}

int varint_run_json(const char* config_text) {
  if (!config_text) return record_error(VARINT_ERR_CONFIG, "config", "null document");
  return guarded([&] { varint::run_to_files(varint::RunConfig::from_json_text(config_text)); });
}

int varint_filon_weights(int npoints, double theta, double* re, double* im) {
  if (!re || !im) return record_error(VARINT_ERR_CONFIG, "", "null output buffer");
  if (npoints < 2) return record_error(VARINT_ERR_CONFIG, "points", "need at least 2 points");
  return guarded([&] {
    const varint::QuadratureRule lobatto = varint::lobatto_rule(npoints);
    const varint::CVec w = varint::filon_weights(lobatto.points, theta);
    for (int i = 0; i < npoints; ++i) {
      re[i] = w[i].real();
      im[i] = w[i].imag();
    }
  });
}

int varint_diagnose(const char* csv_path, varint_summary** out) {
  if (!csv_path || !out) return record_error(VARINT_ERR_CONFIG, "", "null argument");
  *out = nullptr;
  return guarded([&] {
    const varint::SeriesTable table = varint::read_csv(csv_path);
    const varint::DiagnosticsSummary summary = varint::diagnose_table(table);
    *out = new varint_summary{varint::summary_to_json(summary)};
  });
}

const char* varint_summary_json(const varint_summary* summary) {
  return summary ? summary->json.c_str() : "";
}

void varint_summary_free(varint_summary* summary) { delete summary; }

const char* varint_last_error(void) { return g_last_error.c_str(); }

}  // extern "C"
