#pragma once

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "coniso/exact.hpp"
#include "coniso/isomaps.hpp"

namespace coniso {

/// Text format: a block starts with "rows cols" followed by rows lines of
/// entries. Entries are decimals, or integers and p/q fractions when the
/// block is exact. Lines starting with '#' are comments; blank lines are
/// ignored. A file may hold several blocks back to back.
class MatrixFormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct MatrixBlock {
  Eigen::MatrixXd values;
  std::optional<RatMatrix> exact;  // set when every entry is an integer or a fraction
};

struct MatrixFile {
  std::vector<std::string> comments;  // without the leading '#', in file order
  std::vector<MatrixBlock> blocks;

  /// key=value pairs of the first comment whose first word is tag.
  std::optional<std::map<std::string, std::string>> manifest(std::string_view tag) const;
};

MatrixFile parse_matrix_text(std::string_view text);
MatrixFile read_matrix_file(const std::string& path);

std::string format_matrix(const Eigen::MatrixXd& m);
std::string format_matrix(const RatMatrix& m);

/// Header "# iso-matrix G=<label> H=<label> cone=<tag> ng=<n> nh=<n>".
std::string format_iso_matrix(const IsoMatrix& m);
void write_iso_matrix(const std::string& path, const IsoMatrix& m);

/// Orders come from the header when present, otherwise from the arguments.
IsoMatrix parse_iso_matrix(std::string_view text, std::optional<int> ng = {},
                           std::optional<int> nh = {});
IsoMatrix read_iso_matrix(const std::string& path, std::optional<int> ng = {},
                          std::optional<int> nh = {});

/// Manifest "# quantum-certificate ng=<n> nh=<n> d=<d>", then the blocks
/// P_{gh} in the order g * nh + h.
std::string format_certificate(const QuantumCertificate& c);
QuantumCertificate parse_certificate(std::string_view text);
QuantumCertificate read_certificate(const std::string& path);

/// Manifest "# kraus count=<k> rows=<|V_H|> cols=<|V_G|>", then the blocks.
std::string format_kraus(const KrausSet& ks);
KrausSet parse_kraus(std::string_view text);

void write_text_file(const std::string& path, const std::string& text);
std::string read_text_file(const std::string& path);

}  // namespace coniso
