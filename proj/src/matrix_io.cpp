#include "coniso/matrix_io.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace coniso {

namespace {

struct Line {
  int number;
  std::string_view text;
};

std::vector<std::string_view> split_words(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t' || s[i] == '\r')) ++i;
    std::size_t j = i;
    while (j < s.size() && s[j] != ' ' && s[j] != '\t' && s[j] != '\r') ++j;
    if (j > i) out.push_back(s.substr(i, j - i));
    i = j;
  }
  return out;
}

[[noreturn]] void fail(int line, const std::string& what) {
  throw MatrixFormatError("line " + std::to_string(line) + ": " + what);
}

bool is_exact_token(std::string_view t) {
  std::size_t i = (t.size() && (t[0] == '-' || t[0] == '+')) ? 1 : 0;
  bool digits = false, slash = false;
  for (; i < t.size(); ++i) {
    if (t[i] >= '0' && t[i] <= '9') {
      digits = true;
    } else if (t[i] == '/' && !slash && digits) {
      slash = true;
      digits = false;
    } else {
      return false;
    }
  }
  return digits;
}

Rational parse_rational(std::string_view t, int line) {
  std::string s(t[0] == '+' ? t.substr(1) : t);
  Rational q;
  if (q.set_str(s, 10) != 0) fail(line, "malformed fraction '" + s + "'");
  if (q.get_den() == 0) fail(line, "zero denominator in '" + s + "'");
  q.canonicalize();
  return q;
}

double parse_double(std::string_view t, int line) {
  if (!t.empty() && t[0] == '+') t.remove_prefix(1);
  double v = 0;
  auto [end, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc() || end != t.data() + t.size())
    fail(line, "malformed number '" + std::string(t) + "'");
  return v;
}

int parse_count(std::string_view t, int line) {
  int v = 0;
  auto [end, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc() || end != t.data() + t.size() || v < 0)
    fail(line, "expected a nonnegative integer, got '" + std::string(t) + "'");
  return v;
}

int field_int(const std::map<std::string, std::string>& fields, const std::string& key,
              const std::string& what) {
  auto it = fields.find(key);
  if (it == fields.end()) throw MatrixFormatError(what + " manifest lacks '" + key + "'");
  int v = 0;
  auto [end, ec] = std::from_chars(it->second.data(), it->second.data() + it->second.size(), v);
  if (ec != std::errc() || end != it->second.data() + it->second.size() || v < 0)
    throw MatrixFormatError(what + " manifest: bad value for '" + key + "'");
  return v;
}

}  // namespace

std::optional<std::map<std::string, std::string>> MatrixFile::manifest(std::string_view tag) const {
  for (const auto& c : comments) {
    auto words = split_words(c);
    if (words.empty() || words[0] != tag) continue;
    std::map<std::string, std::string> fields;
    for (std::size_t i = 1; i < words.size(); ++i) {
      auto eq = words[i].find('=');
      if (eq == std::string_view::npos) continue;
      fields.emplace(std::string(words[i].substr(0, eq)), std::string(words[i].substr(eq + 1)));
    }
    return fields;
  }
  return std::nullopt;
}

MatrixFile parse_matrix_text(std::string_view text) {
  MatrixFile file;
  std::vector<Line> lines;
  int number = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    ++number;
    pos = end + 1;
    auto first = line.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) continue;
    if (line[first] == '#') {
      std::string_view c = line.substr(first + 1);
      while (!c.empty() && (c.back() == '\r' || c.back() == ' ')) c.remove_suffix(1);
      if (!c.empty() && c.front() == ' ') c.remove_prefix(1);
      file.comments.emplace_back(c);
      continue;
    }
    lines.push_back({number, line});
  }

  std::size_t at = 0;
  while (at < lines.size()) {
    const auto head = split_words(lines[at].text);
    if (head.size() != 2) fail(lines[at].number, "expected 'rows cols'");
    const int rows = parse_count(head[0], lines[at].number);
    const int cols = parse_count(head[1], lines[at].number);
    ++at;
    std::vector<std::vector<std::string_view>> body;
    std::vector<int> row_line;
    bool exact = true;
    for (int r = 0; r < rows; ++r, ++at) {
      if (at >= lines.size()) fail(number, "matrix ends after " + std::to_string(r) + " of " +
                                               std::to_string(rows) + " rows");
      auto words = split_words(lines[at].text);
      if (static_cast<int>(words.size()) != cols)
        fail(lines[at].number, "expected " + std::to_string(cols) + " entries, found " +
                                   std::to_string(words.size()));
      for (auto w : words) exact = exact && is_exact_token(w);
      body.push_back(std::move(words));
      row_line.push_back(lines[at].number);
    }
    MatrixBlock block;
    block.values.resize(rows, cols);
    if (exact) {
      RatMatrix e(rows, cols);
      for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c) e(r, c) = parse_rational(body[r][c], row_line[r]);
      block.values = to_double(e);
      block.exact = std::move(e);
    } else {
      for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c) block.values(r, c) = parse_double(body[r][c], row_line[r]);
    }
    file.blocks.push_back(std::move(block));
  }
  return file;
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw MatrixFormatError("cannot open '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw MatrixFormatError("cannot write '" + path + "'");
  out << text;
}

MatrixFile read_matrix_file(const std::string& path) {
  try {
    return parse_matrix_text(read_text_file(path));
  } catch (const MatrixFormatError& e) {
    throw MatrixFormatError(path + ": " + e.what());
  }
}

std::string format_matrix(const Eigen::MatrixXd& m) {
  std::string out = std::to_string(m.rows()) + " " + std::to_string(m.cols()) + "\n";
  char buf[40];
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      // Signed zeros would read back as exact integers otherwise.
      const double v = m(r, c) == 0.0 ? 0.0 : m(r, c);
      std::snprintf(buf, sizeof buf, "%.17g", v);
      if (c) out += ' ';
      out += buf;
    }
    out += '\n';
  }
  return out;
}

std::string format_matrix(const RatMatrix& m) {
  std::string out = std::to_string(m.rows()) + " " + std::to_string(m.cols()) + "\n";
  for (std::size_t r = 0; r < m.rows(); ++r) {
    for (std::size_t c = 0; c < m.cols(); ++c) {
      if (c) out += ' ';
      out += m(r, c).get_str();
    }
    out += '\n';
  }
  return out;
}

std::string format_iso_matrix(const IsoMatrix& m) {
  auto or_dash = [](const std::string& s) { return s.empty() ? std::string("-") : s; };
  std::string out = "# iso-matrix G=" + or_dash(m.g_label) + " H=" + or_dash(m.h_label) +
                    " cone=" + or_dash(m.cone) + " ng=" + std::to_string(m.ng) +
                    " nh=" + std::to_string(m.nh) + "\n";
  out += m.exact ? format_matrix(*m.exact) : format_matrix(m.values);
  return out;
}

void write_iso_matrix(const std::string& path, const IsoMatrix& m) {
  write_text_file(path, format_iso_matrix(m));
}

IsoMatrix parse_iso_matrix(std::string_view text, std::optional<int> ng, std::optional<int> nh) {
  MatrixFile file = parse_matrix_text(text);
  if (file.blocks.size() != 1)
    throw MatrixFormatError("iso matrix file must hold exactly one matrix, found " +
                            std::to_string(file.blocks.size()));
  std::string g_label, h_label, cone;
  if (auto fields = file.manifest("iso-matrix")) {
    if (fields->count("ng")) ng = field_int(*fields, "ng", "iso-matrix");
    if (fields->count("nh")) nh = field_int(*fields, "nh", "iso-matrix");
    auto get = [&](const char* k) {
      auto it = fields->find(k);
      return it == fields->end() || it->second == "-" ? std::string() : it->second;
    };
    g_label = get("G");
    h_label = get("H");
    cone = get("cone");
  }
  if (!ng || !nh) throw MatrixFormatError("iso matrix: vertex counts are not known");
  MatrixBlock& b = file.blocks[0];
  IsoMatrix m;
  try {
    m = b.exact ? make_iso_matrix(std::move(*b.exact), *ng, *nh, cone)
                : make_iso_matrix(std::move(b.values), *ng, *nh, cone);
  } catch (const std::invalid_argument& e) {
    throw MatrixFormatError(e.what());
  }
  m.g_label = g_label;
  m.h_label = h_label;
  return m;
}

IsoMatrix read_iso_matrix(const std::string& path, std::optional<int> ng, std::optional<int> nh) {
  try {
    return parse_iso_matrix(read_text_file(path), ng, nh);
  } catch (const MatrixFormatError& e) {
    throw MatrixFormatError(path + ": " + e.what());
  }
}

std::string format_certificate(const QuantumCertificate& c) {
  std::string out = "# quantum-certificate ng=" + std::to_string(c.ng) + " nh=" +
                    std::to_string(c.nh) + " d=" + std::to_string(c.dimension()) + "\n";
  for (const auto& p : c.projectors) out += format_matrix(p);
  return out;
}

QuantumCertificate parse_certificate(std::string_view text) {
  MatrixFile file = parse_matrix_text(text);
  auto fields = file.manifest("quantum-certificate");
  if (!fields) throw MatrixFormatError("missing '# quantum-certificate' manifest line");
  QuantumCertificate c;
  c.ng = field_int(*fields, "ng", "quantum-certificate");
  c.nh = field_int(*fields, "nh", "quantum-certificate");
  const int d = field_int(*fields, "d", "quantum-certificate");
  const std::size_t expected = static_cast<std::size_t>(c.ng) * c.nh;
  if (file.blocks.size() != expected)
    throw MatrixFormatError("quantum certificate: expected " + std::to_string(expected) +
                            " blocks, found " + std::to_string(file.blocks.size()));
  for (auto& b : file.blocks) {
    if (b.values.rows() != d || b.values.cols() != d)
      throw MatrixFormatError("quantum certificate: every block must be " + std::to_string(d) +
                              "x" + std::to_string(d));
    c.projectors.push_back(std::move(b.values));
  }
  return c;
}

QuantumCertificate read_certificate(const std::string& path) {
  try {
    return parse_certificate(read_text_file(path));
  } catch (const MatrixFormatError& e) {
    throw MatrixFormatError(path + ": " + e.what());
  }
}

std::string format_kraus(const KrausSet& ks) {
  const long rows = ks.empty() ? 0 : ks[0].rows(), cols = ks.empty() ? 0 : ks[0].cols();
  std::string out = "# kraus count=" + std::to_string(ks.size()) + " rows=" + std::to_string(rows) +
                    " cols=" + std::to_string(cols) + "\n";
  for (const auto& k : ks) out += format_matrix(k);
  return out;
}

KrausSet parse_kraus(std::string_view text) {
  MatrixFile file = parse_matrix_text(text);
  auto fields = file.manifest("kraus");
  if (!fields) throw MatrixFormatError("missing '# kraus' manifest line");
  const int count = field_int(*fields, "count", "kraus");
  const int rows = field_int(*fields, "rows", "kraus");
  const int cols = field_int(*fields, "cols", "kraus");
  if (static_cast<int>(file.blocks.size()) != count)
    throw MatrixFormatError("kraus: manifest announces " + std::to_string(count) + " blocks, found " +
                            std::to_string(file.blocks.size()));
  KrausSet ks;
  for (auto& b : file.blocks) {
    if (b.values.rows() != rows || b.values.cols() != cols)
      throw MatrixFormatError("kraus: block shape disagrees with the manifest");
    ks.push_back(std::move(b.values));
  }
  return ks;
}

}  // namespace coniso
