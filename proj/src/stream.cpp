#include "driftscan/stream.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "driftscan/errors.hpp"

namespace driftscan {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

std::string trim(const std::string& s) {
  size_t b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return "";
  size_t e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

double parse_cell(const std::string& raw, size_t row_1based, const std::string& col) {
  std::string s = trim(raw);
  if (!s.empty()) {
    const char* begin = s.data();
    const char* end = begin + s.size();
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec == std::errc() && ptr == end && std::isfinite(value)) return value;
  }
  std::ostringstream os;
  os << "parse error at row " << row_1based << ", column " << col << ": '" << raw
     << "' is not a finite number";
  throw DataError(os.str());
}

int parse_label(const std::string& raw, size_t row_1based, const std::string& col) {
  std::string s = trim(raw);
  std::string lower;
  for (char c : s) lower += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  if (lower == "true") return 1;
  if (lower == "false") return 0;
  double v = parse_cell(raw, row_1based, col);
  if (v == 0.0) return 0;
  if (v == 1.0) return 1;
  std::ostringstream os;
  os << "label error at row " << row_1based << ", column " << col << ": '" << raw
     << "' is not a binary label";
  throw DataError(os.str());
}

}  // namespace

int CommitStream::find_feature(const std::string& fname) const {
  for (size_t j = 0; j < feature_names.size(); ++j)
    if (feature_names[j] == fname) return static_cast<int>(j);
  return -1;
}

CommitStream load_csv(const std::string& path, const std::vector<std::string>& schema,
                      const std::string& label_column) {
  std::ifstream in(path);
  if (!in) throw DataError("load_csv: cannot open '" + path + "'");
  // lines starting with '#' are comments (the writers put a config audit
  // line above the header); the first non-comment line is the header
  std::string line;
  bool have_header = false;
  while (std::getline(in, line)) {
    if (!line.empty() && line[0] == '#') continue;
    have_header = true;
    break;
  }
  if (!have_header) throw DataError("load_csv: '" + path + "' is empty");
  std::vector<std::string> header = split_csv_line(line);
  for (auto& h : header) h = trim(h);

  auto col_of = [&](const std::string& name) -> int {
    for (size_t i = 0; i < header.size(); ++i)
      if (header[i] == name) return static_cast<int>(i);
    return -1;
  };

  int label_col = -1;
  if (!label_column.empty()) {
    label_col = col_of(label_column);
    if (label_col < 0)
      throw DataError("load_csv: label column '" + label_column + "' not found in '" +
                      path + "'");
  }
  int seq_col = col_of("seq");

  CommitStream cs;
  {
    // stream name from filename stem
    std::string stem = path;
    size_t slash = stem.find_last_of("/\\");
    if (slash != std::string::npos) stem = stem.substr(slash + 1);
    size_t dot = stem.find_last_of('.');
    if (dot != std::string::npos) stem = stem.substr(0, dot);
    cs.name = stem;
  }
  cs.labeled = label_col >= 0;

  std::vector<int> feature_cols;
  if (!schema.empty()) {
    for (const auto& want : schema) {
      int c = col_of(want);
      if (c < 0)
        throw DataError("load_csv: schema column '" + want + "' not found in '" + path +
                        "'");
      if (c == label_col)
        throw DataError("load_csv: schema column '" + want + "' is the label column");
      feature_cols.push_back(c);
      cs.feature_names.push_back(want);
    }
  } else {
    for (size_t i = 0; i < header.size(); ++i) {
      if (static_cast<int>(i) == label_col || static_cast<int>(i) == seq_col) continue;
      feature_cols.push_back(static_cast<int>(i));
      cs.feature_names.push_back(header[i]);
    }
  }
  if (cs.feature_names.empty())
    throw DataError("load_csv: no feature columns in '" + path + "'");

  size_t row_num = 0;  // 1-based over data rows
  double prev_seq = -std::numeric_limits<double>::infinity();
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    ++row_num;
    std::vector<std::string> cells = split_csv_line(line);
    if (cells.size() != header.size()) {
      std::ostringstream os;
      os << "load_csv: row " << row_num << " has " << cells.size()
         << " cells, header has " << header.size();
      throw DataError(os.str());
    }
    std::vector<double> row;
    row.reserve(feature_cols.size());
    for (size_t j = 0; j < feature_cols.size(); ++j)
      row.push_back(parse_cell(cells[feature_cols[j]], row_num, cs.feature_names[j]));
    if (seq_col >= 0 && std::find(feature_cols.begin(), feature_cols.end(), seq_col) ==
                            feature_cols.end()) {
      double s = parse_cell(cells[seq_col], row_num, "seq");
      if (s <= prev_seq) {
        std::ostringstream os;
        os << "load_csv: ordering error at row " << row_num
           << ": seq value " << s << " does not increase";
        throw DataError(os.str());
      }
      prev_seq = s;
    }
    cs.rows.push_back(std::move(row));
    if (label_col >= 0)
      cs.labels.push_back(parse_label(cells[label_col], row_num, label_column));
  }
  if (cs.rows.empty()) throw DataError("load_csv: '" + path + "' has no data rows");
  return cs;
}

CommitStream normalize_entropy(const CommitStream& in) {
  int e = in.find_feature("entropy");
  int nf = in.find_feature("nf");
  if (e < 0 || nf < 0)
    throw DataError("normalize_entropy: stream lacks 'entropy' or 'nf' column");
  CommitStream out = in;
  for (auto& row : out.rows) {
    double files = row[nf];
    row[e] = files > 1.0 ? row[e] / std::log2(files) : 0.0;
  }
  return out;
}

std::pair<CommitStream, std::vector<std::string>> spearman_prune(const CommitStream& in,
                                                                 double threshold) {
  if (!(threshold > 0.0))
    throw ConfigError("spearman_prune: threshold must be positive");
  size_t d = in.d();
  std::vector<std::vector<double>> cols(d, std::vector<double>(in.n()));
  for (size_t i = 0; i < in.n(); ++i)
    for (size_t j = 0; j < d; ++j) cols[j][i] = in.rows[i][j];

  std::vector<size_t> alive(d);
  for (size_t j = 0; j < d; ++j) alive[j] = j;
  std::vector<std::string> removed;

  // Pairwise correlations are recomputed over survivors each round; the
  // matrix is small (feature count), the ranks dominate, so cache ranks once.
  std::vector<std::vector<double>> ranks(d);
  for (size_t j = 0; j < d; ++j) ranks[j] = midranks(cols[j]);

  auto rho = [&](size_t a, size_t b) {
    double mx = 0.0, my = 0.0;
    size_t n = ranks[a].size();
    for (size_t i = 0; i < n; ++i) {
      mx += ranks[a][i];
      my += ranks[b][i];
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (size_t i = 0; i < n; ++i) {
      double dx = ranks[a][i] - mx, dy = ranks[b][i] - my;
      sxy += dx * dy;
      sxx += dx * dx;
      syy += dy * dy;
    }
    if (sxx == 0.0 || syy == 0.0) {
      log_warn("spearman_prune: constant feature '" + in.feature_names[a] + "' or '" +
               in.feature_names[b] + "', correlation treated as 0");
      return 0.0;
    }
    return sxy / std::sqrt(sxx * syy);
  };

  while (alive.size() > 1) {
    size_t m = alive.size();
    Matrix r(m, std::vector<double>(m, 0.0));
    double best = 0.0;
    size_t bi = 0, bj = 0;
    for (size_t i = 0; i < m; ++i) {
      for (size_t j = i + 1; j < m; ++j) {
        r[i][j] = r[j][i] = rho(alive[i], alive[j]);
        double mag = std::fabs(r[i][j]);
        if (mag > best) {
          best = mag;
          bi = i;
          bj = j;
        }
      }
    }
    if (best <= threshold) break;
    // drop the member with larger mean |rho| to the other survivors
    auto mean_abs = [&](size_t idx) {
      double acc = 0.0;
      for (size_t j = 0; j < m; ++j)
        if (j != idx) acc += std::fabs(r[idx][j]);
      return acc / static_cast<double>(m - 1);
    };
    double ma = mean_abs(bi), mb = mean_abs(bj);
    size_t victim;
    if (ma > mb) victim = bi;
    else if (mb > ma) victim = bj;
    else victim = (alive[bi] > alive[bj]) ? bi : bj;  // tie: later schema position
    removed.push_back(in.feature_names[alive[victim]]);
    alive.erase(alive.begin() + static_cast<long>(victim));
  }

  CommitStream out;
  out.name = in.name;
  out.labeled = in.labeled;
  out.labels = in.labels;
  for (size_t j : alive) out.feature_names.push_back(in.feature_names[j]);
  out.rows.reserve(in.n());
  for (const auto& row : in.rows) {
    std::vector<double> nr;
    nr.reserve(alive.size());
    for (size_t j : alive) nr.push_back(row[j]);
    out.rows.push_back(std::move(nr));
  }
  return {out, removed};
}

CommitStream zscore_scale(const CommitStream& in, size_t fit_begin, size_t fit_end) {
  if (fit_begin >= fit_end || fit_end > in.n())
    throw ConfigError("zscore_scale: invalid fit window");
  CommitStream out = in;
  double nfit = static_cast<double>(fit_end - fit_begin);
  for (size_t j = 0; j < in.d(); ++j) {
    std::string lower;
    for (char c : in.feature_names[j])
      lower += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    if (lower == "fix") continue;  // boolean indicator stays as-is
    double mu = 0.0;
    for (size_t i = fit_begin; i < fit_end; ++i) mu += in.rows[i][j];
    mu /= nfit;
    double var = 0.0;
    for (size_t i = fit_begin; i < fit_end; ++i) {
      double dv = in.rows[i][j] - mu;
      var += dv * dv;
    }
    var /= nfit;  // population variance
    if (var == 0.0) {
      for (size_t i = 0; i < in.n(); ++i) out.rows[i][j] = 0.0;
    } else {
      double sd = std::sqrt(var);
      for (size_t i = 0; i < in.n(); ++i) out.rows[i][j] = (in.rows[i][j] - mu) / sd;
    }
  }
  return out;
}

GroupedStream chunk_groups(const CommitStream& in, int group_size, int train_groups,
                           int vl_gap_groups) {
  if (group_size < 2) throw ConfigError("chunk_groups: group_size must be at least 2");
  if (train_groups < 1) throw ConfigError("chunk_groups: train_groups must be at least 1");
  if (vl_gap_groups < 0)
    throw ConfigError("chunk_groups: vl_gap_groups must be non-negative");
  size_t need_groups = static_cast<size_t>(train_groups) +
                       static_cast<size_t>(vl_gap_groups) + 1;
  size_t full = in.n() / static_cast<size_t>(group_size);
  if (full < need_groups) {
    std::ostringstream os;
    os << "chunk_groups: stream has " << in.n() << " records, needs at least "
       << need_groups * static_cast<size_t>(group_size) << " ("
       << need_groups << " groups of " << group_size
       << ": train=" << train_groups << ", gap=" << vl_gap_groups
       << ", and one test group)";
    throw DataError(os.str());
  }

  GroupedStream gs;
  gs.dataset = in.name;
  gs.feature_names = in.feature_names;
  gs.labeled = in.labeled;
  gs.group_size = group_size;
  gs.train_groups = train_groups;
  gs.vl_gap_groups = vl_gap_groups;
  gs.dropped_records = in.n() - full * static_cast<size_t>(group_size);
  if (gs.dropped_records > 0)
    log_info("chunk_groups: dropping " + std::to_string(gs.dropped_records) +
             " tail record(s) short of a full group");

  gs.groups.reserve(full);
  for (size_t g = 0; g < full; ++g) {
    Group grp;
    grp.index = static_cast<int>(g);
    size_t base = g * static_cast<size_t>(group_size);
    for (size_t k = 0; k < static_cast<size_t>(group_size); ++k) {
      grp.rows.push_back(in.rows[base + k]);
      if (in.labeled) grp.labels.push_back(in.labels[base + k]);
      grp.seqs.push_back(base + k);
    }
    gs.groups.push_back(std::move(grp));
  }
  return gs;
}

void training_window(const GroupedStream& gs, Matrix& rows, std::vector<int>& labels) {
  rows.clear();
  labels.clear();
  for (int g = 0; g < gs.train_groups; ++g) {
    const Group& grp = gs.groups[static_cast<size_t>(g)];
    rows.insert(rows.end(), grp.rows.begin(), grp.rows.end());
    labels.insert(labels.end(), grp.labels.begin(), grp.labels.end());
  }
}

nlohmann::ordered_json grouping_manifest(const GroupedStream& gs) {
  nlohmann::ordered_json j;
  j["dataset"] = gs.dataset;
  j["group_size"] = gs.group_size;
  j["n_groups"] = gs.n_groups();
  j["train_groups"] = gs.train_groups;
  j["vl_gap_groups"] = gs.vl_gap_groups;
  j["first_test_group"] = gs.first_test_group();
  j["dropped_records"] = gs.dropped_records;
  j["labeled"] = gs.labeled;
  j["feature_names"] = gs.feature_names;
  return j;
}

}  // namespace driftscan
