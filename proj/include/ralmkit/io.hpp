#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "ralmkit/common.hpp"
#include "ralmkit/ralm.hpp"

namespace ralmkit {

// Malformed input file; the message names the line (and field when known).
class ParseError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

// Writes via a sibling temporary file and rename.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

// Comma-separated dense matrix, one row per line, '.' decimal separator.
Matrix load_csv(const std::filesystem::path& path);
Matrix parse_csv(const std::string& text);
// 17 significant digits, so load_csv(save_csv(M)) reproduces M exactly.
std::string format_csv(const Matrix& m);
void save_csv(const std::filesystem::path& path, const Matrix& m);

struct SparseObservations {
  Matrix values;
  // 0/1 indicator of the listed entries.
  Matrix mask;
  std::size_t entries = 0;
};

// Matrix Market coordinate format (real/integer, general).
SparseObservations load_matrix_market(const std::filesystem::path& path);
SparseObservations parse_matrix_market(const std::string& text);

enum class DenseFormat { kCsv, kMatrixMarket };

// Dense view of either format; Matrix Market entries not listed are zero.
Matrix load_dense(const std::filesystem::path& path, DenseFormat format);

inline constexpr const char* kLogHeader =
    "k,rho,rho_tilde,inner_iters,grad_norm,kkt_residual,dual_step_norm,auglag";

std::string format_log(const std::vector<IterateRecord>& records);
void save_log(const std::filesystem::path& path, const std::vector<IterateRecord>& records);
std::vector<IterateRecord> parse_log(const std::string& text);
std::vector<IterateRecord> load_log(const std::filesystem::path& path);

// Polyline chart of log10(kkt_residual) against k.
std::string residual_svg(const std::vector<IterateRecord>& records);

std::string read_file(const std::filesystem::path& path);

}  // namespace ralmkit
