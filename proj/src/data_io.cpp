#include "dptf/data_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "dptf/kernels.hpp"

namespace dptf {

std::string format_double(double value) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", value);
  return buf;
}

double quantile_sorted(std::span<const double> sorted, double prob) {
  if (sorted.empty()) throw std::invalid_argument("quantile_sorted: empty input");
  if (sorted.size() == 1) return sorted[0];
  const double h = prob * (static_cast<double>(sorted.size()) - 1.0);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = h - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

CategoricalSchema CodebookSpec::schema() const {
  std::vector<int> levels;
  levels.reserve(variables.size());
  for (const auto& v : variables) levels.push_back(v.levels);
  return CategoricalSchema(levels);
}

void CodebookSpec::validate() const {
  if (variables.empty()) throw std::invalid_argument("codebook: no variables");
  for (const auto& v : variables) {
    if (v.name.empty()) throw std::invalid_argument("codebook: unnamed variable");
    if (v.levels < 2) throw std::invalid_argument("codebook: variable " + v.name + " needs >= 2 levels");
    if (!v.level_labels.empty() && static_cast<int>(v.level_labels.size()) != v.levels) {
      throw std::invalid_argument("codebook: label count mismatch for " + v.name);
    }
    for (const auto& [raw, coded] : v.recode) {
      if (coded < 0 || coded > v.levels) {
        throw std::invalid_argument("codebook: recode target out of range for " + v.name);
      }
    }
  }
}

CodebookSpec CodebookSpec::identity(const CategoricalSchema& schema,
                                    const std::vector<std::string>& names) {
  CodebookSpec cb;
  cb.variables.resize(schema.num_vars());
  for (int j = 0; j < schema.num_vars(); ++j) {
    cb.variables[j].name = names.empty() ? "v" + std::to_string(j + 1) : names.at(j);
    cb.variables[j].levels = schema.levels(j);
  }
  return cb;
}

CodebookSpec CodebookSpec::from_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("codebook: cannot open " + path);
  nlohmann::json doc = nlohmann::json::parse(in);
  CodebookSpec cb;
  for (const auto& var : doc.at("variables")) {
    VariableSpec spec;
    spec.name = var.at("name").get<std::string>();
    spec.levels = var.at("levels").get<int>();
    if (var.contains("labels")) spec.level_labels = var["labels"].get<std::vector<std::string>>();
    if (var.contains("recode")) {
      for (auto it = var["recode"].begin(); it != var["recode"].end(); ++it) {
        spec.recode[std::stoi(it.key())] = it.value().get<int>();
      }
    }
    cb.variables.push_back(std::move(spec));
  }
  cb.validate();
  return cb;
}

void CodebookSpec::to_json_file(const std::string& path) const {
  validate();
  nlohmann::json doc;
  doc["variables"] = nlohmann::json::array();
  for (const auto& v : variables) {
    nlohmann::json var;
    var["name"] = v.name;
    var["levels"] = v.levels;
    if (!v.level_labels.empty()) var["labels"] = v.level_labels;
    if (!v.recode.empty()) {
      nlohmann::json recode;
      for (const auto& [raw, coded] : v.recode) recode[std::to_string(raw)] = coded;
      var["recode"] = recode;
    }
    doc["variables"].push_back(std::move(var));
  }
  std::ofstream out(path);
  if (!out) throw std::runtime_error("codebook: cannot write " + path);
  out << doc.dump(2) << "\n";
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, ',')) {
    // trim surrounding blanks
    const auto first = field.find_first_not_of(" \t\r");
    if (first == std::string::npos) {
      fields.emplace_back();
    } else {
      const auto last = field.find_last_not_of(" \t\r");
      fields.push_back(field.substr(first, last - first + 1));
    }
  }
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

bool is_missing_token(const std::string& token) {
  return token.empty() || token == "NA" || token == "na" || token == "NaN";
}

}  // namespace

Dataset load_dataset(const std::string& path, const CodebookSpec& codebook) {
  codebook.validate();
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_dataset: cannot open " + path);

  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("load_dataset: empty file " + path);
  const auto header = split_csv_line(line);

  int time_col = -1;
  std::vector<int> var_col(codebook.variables.size(), -1);
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (header[c] == "time") {
      time_col = static_cast<int>(c);
      continue;
    }
    bool known = false;
    for (std::size_t v = 0; v < codebook.variables.size(); ++v) {
      if (header[c] == codebook.variables[v].name) {
        var_col[v] = static_cast<int>(c);
        known = true;
        break;
      }
    }
    if (!known) throw std::runtime_error("load_dataset: column '" + header[c] + "' not in codebook");
  }
  if (time_col < 0) throw std::runtime_error("load_dataset: missing required 'time' column");
  for (std::size_t v = 0; v < codebook.variables.size(); ++v) {
    if (var_col[v] < 0) {
      throw std::runtime_error("load_dataset: variable '" + codebook.variables[v].name +
                               "' absent from header");
    }
  }

  struct RawRow {
    double time;
    std::vector<std::string> fields;
  };
  std::vector<RawRow> rows;
  int line_number = 1;
  while (std::getline(in, line)) {
    ++line_number;
    if (line.empty()) continue;
    auto fields = split_csv_line(line);
    if (fields.size() != header.size()) {
      throw std::runtime_error("load_dataset: row " + std::to_string(line_number) +
                               " has " + std::to_string(fields.size()) + " fields, expected " +
                               std::to_string(header.size()));
    }
    RawRow row;
    try {
      row.time = std::stod(fields[time_col]);
    } catch (const std::exception&) {
      throw std::runtime_error("load_dataset: row " + std::to_string(line_number) +
                               ": bad time value '" + fields[time_col] + "'");
    }
    row.fields = std::move(fields);
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw std::runtime_error("load_dataset: no data rows in " + path);

  // contiguous strictly-increasing wave labels
  std::vector<double> wave_labels;
  std::vector<std::pair<std::size_t, std::size_t>> wave_ranges;
  std::size_t start = 0;
  for (std::size_t r = 1; r <= rows.size(); ++r) {
    if (r == rows.size() || rows[r].time != rows[start].time) {
      if (!wave_labels.empty() && rows[start].time <= wave_labels.back()) {
        throw std::runtime_error("load_dataset: time labels must be strictly increasing "
                                 "and grouped (offending label " +
                                 format_double(rows[start].time) + ")");
      }
      wave_labels.push_back(rows[start].time);
      wave_ranges.emplace_back(start, r);
      start = r;
    }
  }

  const auto schema = codebook.schema();
  std::vector<ObservationBlock> waves;
  waves.reserve(wave_ranges.size());
  for (const auto& [lo, hi] : wave_ranges) {
    ObservationBlock block(static_cast<int>(hi - lo), schema.num_vars());
    for (std::size_t r = lo; r < hi; ++r) {
      for (int j = 0; j < schema.num_vars(); ++j) {
        const std::string& token = rows[r].fields[var_col[j]];
        if (is_missing_token(token)) continue;
        int raw;
        try {
          raw = std::stoi(token);
        } catch (const std::exception&) {
          throw std::runtime_error("load_dataset: non-integer code '" + token + "' in column '" +
                                   codebook.variables[j].name + "'");
        }
        int coded = raw;
        const auto& recode = codebook.variables[j].recode;
        if (!recode.empty()) {
          const auto it = recode.find(raw);
          if (it == recode.end()) {
            throw std::runtime_error("load_dataset: unmapped raw code " + std::to_string(raw) +
                                     " in column '" + codebook.variables[j].name + "'");
          }
          coded = it->second;
          if (coded == 0) continue;  // mapped to missing
        }
        if (coded < 1 || coded > codebook.variables[j].levels) {
          throw std::runtime_error("load_dataset: code " + std::to_string(raw) +
                                   " out of range in column '" + codebook.variables[j].name + "'");
        }
        block.set(static_cast<int>(r - lo), j, coded - 1);
      }
    }
    waves.push_back(std::move(block));
  }
  return Dataset(schema, std::move(waves), std::move(wave_labels));
}

void write_dataset(const Dataset& data, const CodebookSpec& codebook, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_dataset: cannot write " + path);
  out << "time";
  for (const auto& v : codebook.variables) out << "," << v.name;
  out << "\n";
  for (int t = 0; t < data.num_waves(); ++t) {
    const auto& wave = data.wave(t);
    for (int i = 0; i < wave.num_subjects(); ++i) {
      out << format_double(data.time_label(t));
      for (int j = 0; j < wave.num_vars(); ++j) {
        out << ",";
        if (!wave.missing(i, j)) out << wave.level(i, j) + 1;
      }
      out << "\n";
    }
  }
}

void write_draws(const PosteriorDraws& draws, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_draws: cannot write " + path);
  out << "dptf-draws 1\n";
  out << "schema " << draws.schema.num_vars();
  for (int j = 0; j < draws.schema.num_vars(); ++j) out << " " << draws.schema.levels(j);
  out << "\n";
  out << "horizon " << draws.horizon << "\n";
  out << "count " << draws.draws.size() << "\n";
  for (const auto& draw : draws.draws) {
    out << "draw " << draw.chain << " " << draw.sweep << " " << draw.k_star << " " << draw.cover
        << " " << format_double(draw.mu) << " " << format_double(draw.phi) << " "
        << format_double(draw.var_obs) << " " << format_double(draw.var_state) << "\n";
    for (int t = 0; t < draws.horizon; ++t) {
      out << "w " << t;
      for (int h = 0; h < draw.k_star; ++h) out << " " << format_double(draw.weights[t][h]);
      out << "\n";
    }
    for (int h = 0; h < draw.k_star; ++h) {
      for (int j = 0; j < draws.schema.num_vars(); ++j) {
        out << "a " << h << " " << j;
        for (double v : draw.atoms[h][j]) out << " " << format_double(v);
        out << "\n";
      }
    }
    out << "s";
    for (double v : draw.last_state) out << " " << format_double(v);
    out << "\n";
  }
  out << "end\n";
}

PosteriorDraws read_draws(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("read_draws: cannot open " + path);
  std::string token;
  in >> token;
  if (token != "dptf-draws") throw std::runtime_error("read_draws: not a draw file: " + path);
  int version;
  in >> version;
  if (version != 1) {
    throw std::runtime_error("read_draws: unsupported version " + std::to_string(version));
  }
  auto expect = [&](const char* word) {
    in >> token;
    if (!in || token != word) {
      throw std::runtime_error(std::string("read_draws: truncated or malformed file (expected '") +
                               word + "')");
    }
  };
  expect("schema");
  int p;
  in >> p;
  std::vector<int> levels(p);
  for (int j = 0; j < p; ++j) in >> levels[j];
  if (!in) throw std::runtime_error("read_draws: truncated schema");
  CategoricalSchema schema(levels);
  expect("horizon");
  int horizon;
  in >> horizon;
  expect("count");
  std::size_t count;
  in >> count;
  if (!in) throw std::runtime_error("read_draws: truncated header");

  PosteriorDraws draws{schema, horizon, {}, {}};
  draws.draws.reserve(count);
  for (std::size_t d = 0; d < count; ++d) {
    expect("draw");
    Draw draw;
    in >> draw.chain >> draw.sweep >> draw.k_star >> draw.cover >> draw.mu >> draw.phi >>
        draw.var_obs >> draw.var_state;
    if (!in) throw std::runtime_error("read_draws: truncated draw record");
    draw.weights.assign(horizon, std::vector<double>(draw.k_star, 0.0));
    for (int t = 0; t < horizon; ++t) {
      expect("w");
      int tt;
      in >> tt;
      for (int h = 0; h < draw.k_star; ++h) in >> draw.weights[t][h];
    }
    draw.atoms.assign(draw.k_star, std::vector<std::vector<double>>(p));
    for (int h = 0; h < draw.k_star; ++h) {
      for (int j = 0; j < p; ++j) {
        expect("a");
        int hh, jj;
        in >> hh >> jj;
        draw.atoms[h][j].resize(schema.levels(j));
        for (auto& v : draw.atoms[h][j]) in >> v;
      }
    }
    expect("s");
    draw.last_state.resize(draw.k_star);
    for (auto& v : draw.last_state) in >> v;
    if (!in) throw std::runtime_error("read_draws: truncated draw body");
    draws.draws.push_back(std::move(draw));
  }
  expect("end");
  return draws;
}

std::vector<RhoSummaryRow> rho_summary(const PosteriorDraws& draws,
                                       const std::vector<std::pair<int, int>>& pairs) {
  if (draws.draws.empty()) throw std::invalid_argument("rho_summary: no draws");
  std::vector<std::pair<int, int>> wanted = pairs;
  if (wanted.empty()) {
    for (int j = 0; j < draws.schema.num_vars(); ++j) {
      for (int jp = j + 1; jp < draws.schema.num_vars(); ++jp) wanted.emplace_back(j, jp);
    }
  }
  for (auto& [j, jp] : wanted) {
    if (j > jp) std::swap(j, jp);
    if (j == jp) throw std::invalid_argument("rho_summary: pair with equal variables");
  }

  // per (pair, t): the per-draw values, materializing each draw's mixture once
  std::vector<std::vector<double>> values(wanted.size() * draws.horizon);
  for (auto& v : values) v.reserve(draws.draws.size());
  for (const auto& draw : draws.draws) {
    const ParafacMixture mixture = draws.mixture_of(draw);
    for (std::size_t pair = 0; pair < wanted.size(); ++pair) {
      for (int t = 0; t < draws.horizon; ++t) {
        values[pair * draws.horizon + t].push_back(
            mixture.pairwise_dependence(t, wanted[pair].first, wanted[pair].second));
      }
    }
  }

  std::vector<RhoSummaryRow> rows;
  rows.reserve(values.size());
  for (std::size_t pair = 0; pair < wanted.size(); ++pair) {
    for (int t = 0; t < draws.horizon; ++t) {
      auto& v = values[pair * draws.horizon + t];
      std::sort(v.begin(), v.end());
      double mean = 0.0;
      for (double x : v) mean += x;
      mean /= static_cast<double>(v.size());
      rows.push_back({t, wanted[pair].first, wanted[pair].second, mean,
                      quantile_sorted(v, 0.025), quantile_sorted(v, 0.975)});
    }
  }
  return rows;
}

void write_rho_summary(const PosteriorDraws& draws,
                       const std::vector<std::pair<int, int>>& pairs,
                       const std::string& path) {
  const auto rows = rho_summary(draws, pairs);
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_rho_summary: cannot write " + path);
  out << "t,j,jp,mean,q025,q975\n";
  for (const auto& row : rows) {
    out << row.t + 1 << "," << row.j + 1 << "," << row.jp + 1 << "," << format_double(row.mean)
        << "," << format_double(row.lo) << "," << format_double(row.hi) << "\n";
  }
}

}  // namespace dptf
