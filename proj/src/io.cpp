#include "advmetrics/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "advmetrics/error.hpp"
#include "advmetrics/seeding.hpp"

namespace advmetrics {

namespace {

using nlohmann::json;

std::string fmt(double v, const char* spec = "%.17g") {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path);
  if (!in) raise(Errc::io_error, "cannot open '" + path + "' for reading");
  return in;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) raise(Errc::io_error, "cannot open '" + path + "' for writing");
  return out;
}

std::string meta_comment(const RunMeta& meta) {
  std::string line = "# advmetrics version=" + meta.version + " seed=" +
                     std::to_string(meta.seed);
  if (!meta.attack.empty()) line += " attack=" + meta.attack;
  if (!meta.model.empty()) line += " model=" + meta.model;
  return line;
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> parts;
  std::string cur;
  for (char c : line) {
    if (c == sep) {
      parts.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  parts.push_back(cur);
  return parts;
}

double parse_double(const std::string& s, const std::string& where) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    raise(Errc::parse_error, where + ": '" + s + "' is not a number");
  }
}

long long parse_int(const std::string& s, const std::string& where) {
  try {
    std::size_t used = 0;
    const long long v = std::stoll(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    raise(Errc::parse_error, where + ": '" + s + "' is not an integer");
  }
}

std::string strip(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

// ---------------------------------------------------------------- taxonomy

Taxonomy read_taxonomy_file(const std::string& path) {
  std::ifstream in = open_in(path);
  std::vector<std::pair<std::string, std::string>> edges;
  std::vector<std::pair<int, std::string>> labels;
  bool in_labels = false;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string where = path + ":" + std::to_string(line_no);
    line = strip(line);
    if (line.empty()) continue;
    if (line[0] == '#') {
      if (line == "#labels") in_labels = true;
      continue;
    }
    const auto parts = split(line, '\t');
    if (parts.size() != 2) raise(Errc::parse_error, where + ": expected two tab-separated fields");
    if (in_labels) {
      labels.emplace_back(static_cast<int>(parse_int(parts[0], where)), parts[1]);
    } else {
      edges.emplace_back(parts[0], parts[1]);
    }
  }
  return load_taxonomy(edges, labels);
}

void write_taxonomy_file(const std::string& path, const Taxonomy& t, const RunMeta* meta) {
  std::ofstream out = open_out(path);
  if (meta) out << meta_comment(*meta) << "\n";
  for (const auto& [child, parent] : t.edge_list()) out << child << "\t" << parent << "\n";
  out << "#labels\n";
  for (const auto& [label, node] : t.label_list()) out << label << "\t" << node << "\n";
}

// ---------------------------------------------------------------- templates

WeightTemplates read_templates_csv(const std::string& path) {
  std::ifstream in = open_in(path);
  std::string line;
  int line_no = 0;
  bool header_seen = false;
  std::size_t dim = 0;
  std::vector<double> weights;
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string where = path + ":" + std::to_string(line_no);
    line = strip(line);
    if (line.empty() || line[0] == '#') continue;
    const auto parts = split(line, ',');
    if (!header_seen) {
      if (parts.size() < 2 || parts[0] != "class_id" || parts[1] != "w_0")
        raise(Errc::parse_error, where + ": expected header class_id,w_0,...");
      dim = parts.size() - 1;
      header_seen = true;
      continue;
    }
    if (parts.size() != dim + 1)
      raise(Errc::dimension_mismatch, where + ": row has " + std::to_string(parts.size() - 1) +
                                          " weights, expected " + std::to_string(dim));
    const long long class_id = parse_int(parts[0], where);
    if (class_id != static_cast<long long>(rows))
      raise(Errc::parse_error, where + ": class ids must be dense 0..C-1 in order");
    for (std::size_t i = 1; i < parts.size(); ++i)
      weights.push_back(parse_double(parts[i], where));
    ++rows;
  }
  if (!header_seen || rows == 0) raise(Errc::parse_error, path + ": no template rows");
  return make_templates(rows, dim, std::move(weights));
}

void write_templates_csv(const std::string& path, const WeightTemplates& w,
                         const RunMeta* meta) {
  std::ofstream out = open_out(path);
  if (meta) out << meta_comment(*meta) << "\n";
  out << "class_id";
  for (std::size_t i = 0; i < w.feature_dim; ++i) out << ",w_" << i;
  out << "\n";
  for (std::size_t c = 0; c < w.class_count; ++c) {
    out << c;
    for (double v : w.row(c)) out << "," << fmt(v);
    out << "\n";
  }
}

// ---------------------------------------------------------------- matrix

Matrix read_matrix_csv(const std::string& path) {
  std::ifstream in = open_in(path);
  std::string line;
  int line_no = 0;
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string where = path + ":" + std::to_string(line_no);
    line = strip(line);
    if (line.empty() || line[0] == '#') continue;
    const auto parts = split(line, ',');
    std::vector<double> row;
    row.reserve(parts.size());
    for (const auto& p : parts) row.push_back(parse_double(p, where));
    if (!rows.empty() && row.size() != rows.front().size())
      raise(Errc::shape_mismatch, where + ": ragged matrix row");
    rows.push_back(std::move(row));
  }
  if (rows.empty()) raise(Errc::parse_error, path + ": empty matrix");
  Matrix m(rows.size(), rows.front().size());
  for (std::size_t i = 0; i < m.rows; ++i)
    for (std::size_t j = 0; j < m.cols; ++j) m.at(i, j) = rows[i][j];
  return m;
}

void write_matrix_csv(const std::string& path, const Matrix& m, const RunMeta* meta) {
  std::ofstream out = open_out(path);
  if (meta) out << meta_comment(*meta) << "\n";
  for (std::size_t i = 0; i < m.rows; ++i) {
    for (std::size_t j = 0; j < m.cols; ++j) {
      if (j) out << ",";
      out << fmt(m.at(i, j), "%.9g");
    }
    out << "\n";
  }
}

// ---------------------------------------------------------------- records

RecordSet parse_records(const std::string& path, RunMeta* meta_out) {
  std::ifstream in = open_in(path);
  RecordSet rs;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string where = path + ":" + std::to_string(line_no);
    if (strip(line).empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      raise(Errc::parse_error, where + ": " + e.what());
    }
    PredictionRecord rec;
    try {
      rec.id = j.at("id").get<std::int64_t>();
      rec.pre_label = j.at("pre_label").get<int>();
      rec.post_ranking = j.at("post_ranking").get<std::vector<int>>();
      rec.pre_label_rank = j.at("pre_label_rank").get<int>();
      if (j.contains("target_label") && !j["target_label"].is_null())
        rec.target_label = j["target_label"].get<int>();
    } catch (const json::exception& e) {
      raise(Errc::parse_error, where + ": " + e.what());
    }
    if (rs.records.empty()) rs.class_count = static_cast<int>(rec.post_ranking.size());
    rs.records.push_back(std::move(rec));
  }
  if (rs.records.empty()) raise(Errc::parse_error, path + ": no records");
  validate_record_set(rs);

  // Optional provenance sidecar.
  std::ifstream meta_in(path + ".meta.json");
  if (meta_in) {
    try {
      json j = json::parse(meta_in);
      rs.attack = j.value("attack", "");
      rs.model = j.value("model", "");
      if (meta_out) {
        meta_out->version = j.value("version", "");
        meta_out->seed = j.value("seed", std::uint64_t{0});
        meta_out->attack = rs.attack;
        meta_out->model = rs.model;
      }
    } catch (const json::exception&) {
      // sidecar is best effort; a broken one never fails record parsing
    }
  }
  return rs;
}

void write_records(const std::string& path, const RecordSet& rs, const RunMeta& meta) {
  validate_record_set(rs);
  std::ofstream out = open_out(path);
  for (const auto& r : rs.records) {
    json j;
    j["id"] = r.id;
    j["pre_label"] = r.pre_label;
    j["post_ranking"] = r.post_ranking;
    j["pre_label_rank"] = r.pre_label_rank;
    if (r.target_label) j["target_label"] = *r.target_label;
    out << j.dump() << "\n";
  }
  json m;
  m["version"] = meta.version;
  m["seed"] = meta.seed;
  m["attack"] = meta.attack.empty() ? rs.attack : meta.attack;
  m["model"] = meta.model.empty() ? rs.model : meta.model;
  m["record_count"] = rs.records.size();
  m["class_count"] = rs.class_count;
  open_out(path + ".meta.json") << m.dump(2) << "\n";
}

// ---------------------------------------------------------------- model

void write_model_file(const std::string& path, const ToyClassifier& m, const RunMeta* meta) {
  std::ofstream out = open_out(path);
  if (meta) out << meta_comment(*meta) << "\n";
  out << "advmetrics-model 1\n";
  out << "layers " << m.layers().size() << "\n";
  for (const auto& l : m.layers()) {
    out << "layer " << l.out << " " << l.in << "\n";
    for (int r = 0; r < l.out; ++r) {
      for (int c = 0; c < l.in; ++c) {
        if (c) out << " ";
        out << fmt(l.weights[static_cast<std::size_t>(r) * l.in + c]);
      }
      out << "\n";
    }
    out << "bias";
    for (int r = 0; r < l.out; ++r) out << " " << fmt(l.biases[r]);
    out << "\n";
  }
}

ToyClassifier read_model_file(const std::string& path) {
  std::ifstream in = open_in(path);
  std::string line;
  auto next_line = [&](const char* what) {
    while (std::getline(in, line)) {
      line = strip(line);
      if (!line.empty() && line[0] != '#') return;
    }
    raise(Errc::parse_error, path + ": unexpected end of file, expected " + std::string(what));
  };

  next_line("format tag");
  if (line != "advmetrics-model 1")
    raise(Errc::parse_error, path + ": unknown model format '" + line + "'");
  next_line("layer count");
  std::istringstream hdr(line);
  std::string tag;
  std::size_t n_layers = 0;
  if (!(hdr >> tag >> n_layers) || tag != "layers" || n_layers == 0)
    raise(Errc::parse_error, path + ": bad layer count line '" + line + "'");

  std::vector<Layer> layers;
  for (std::size_t li = 0; li < n_layers; ++li) {
    next_line("layer header");
    std::istringstream lh(line);
    Layer l;
    if (!(lh >> tag >> l.out >> l.in) || tag != "layer" || l.out < 1 || l.in < 1)
      raise(Errc::parse_error, path + ": bad layer header '" + line + "'");
    l.weights.resize(static_cast<std::size_t>(l.out) * l.in);
    for (int r = 0; r < l.out; ++r) {
      next_line("weight row");
      std::istringstream row(line);
      for (int c = 0; c < l.in; ++c) {
        if (!(row >> l.weights[static_cast<std::size_t>(r) * l.in + c]))
          raise(Errc::parse_error, path + ": short weight row in layer " + std::to_string(li));
      }
    }
    next_line("bias row");
    std::istringstream brow(line);
    if (!(brow >> tag) || tag != "bias")
      raise(Errc::parse_error, path + ": expected bias row in layer " + std::to_string(li));
    l.biases.resize(l.out);
    for (int r = 0; r < l.out; ++r) {
      if (!(brow >> l.biases[r]))
        raise(Errc::parse_error, path + ": short bias row in layer " + std::to_string(li));
    }
    layers.push_back(std::move(l));
  }
  return ToyClassifier::from_layers(std::move(layers));
}

// ---------------------------------------------------------------- task

void write_task_csv(const std::string& path, const SyntheticTask& task, const RunMeta* meta) {
  std::ofstream out = open_out(path);
  if (meta) out << meta_comment(*meta) << "\n";
  out << "label";
  for (int k = 0; k < task.feature_dim; ++k) out << ",x_" << k;
  out << "\n";
  for (const auto& s : task.samples) {
    out << s.label;
    for (double v : s.features) out << "," << fmt(v);
    out << "\n";
  }
}

SyntheticTask read_task(const std::string& csv_path, const std::string& taxonomy_path) {
  SyntheticTask task;
  task.taxonomy = read_taxonomy_file(taxonomy_path);
  const std::vector<int> labels = task.taxonomy.labels();
  task.class_count = static_cast<int>(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i)
    if (labels[i] != static_cast<int>(i))
      raise(Errc::parse_error, taxonomy_path + ": labels must be dense 0..C-1 for tasks");

  std::ifstream in = open_in(csv_path);
  std::string line;
  int line_no = 0;
  bool header_seen = false;
  std::size_t dim = 0;
  std::uint64_t seed = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string where = csv_path + ":" + std::to_string(line_no);
    line = strip(line);
    if (line.empty()) continue;
    if (line[0] == '#') {
      const auto pos = line.find("seed=");
      if (pos != std::string::npos) {
        std::istringstream ss(line.substr(pos + 5));
        ss >> seed;
      }
      continue;
    }
    const auto parts = split(line, ',');
    if (!header_seen) {
      if (parts.size() < 3 || parts[0] != "label" || parts[1] != "x_0")
        raise(Errc::parse_error, where + ": expected header label,x_0,...");
      dim = parts.size() - 1;
      header_seen = true;
      continue;
    }
    if (parts.size() != dim + 1)
      raise(Errc::dimension_mismatch, where + ": row width mismatch");
    LabeledSample s;
    s.label = static_cast<int>(parse_int(parts[0], where));
    if (s.label < 0 || s.label >= task.class_count)
      raise(Errc::parse_error, where + ": label outside 0.." +
                                   std::to_string(task.class_count - 1));
    s.features.reserve(dim);
    for (std::size_t i = 1; i < parts.size(); ++i)
      s.features.push_back(parse_double(parts[i], where));
    task.samples.push_back(std::move(s));
  }
  if (!header_seen || task.samples.empty())
    raise(Errc::parse_error, csv_path + ": no samples");
  task.feature_dim = static_cast<int>(dim);
  task.seed = seed;
  refresh_task_stats(task);
  return task;
}

// ---------------------------------------------------------------- subsets

std::vector<CategorySubset> read_subsets_json(const std::string& path, int class_count) {
  std::ifstream in = open_in(path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    raise(Errc::parse_error, path + ": " + e.what());
  }
  if (!j.is_object()) raise(Errc::parse_error, path + ": expected a JSON object");
  std::vector<CategorySubset> subsets;
  for (const auto& [name, members] : j.items()) {
    if (!members.is_array()) raise(Errc::parse_error, path + ": subset '" + name + "' is not an array");
    std::vector<int> ids;
    for (const auto& v : members) {
      if (!v.is_number_integer()) raise(Errc::parse_error, path + ": non-integer class id in '" + name + "'");
      ids.push_back(v.get<int>());
    }
    subsets.push_back(make_subset(name, std::move(ids), class_count));
  }
  return subsets;
}

// ---------------------------------------------------------------- attack config

AttackConfigFile read_attack_config(const std::string& path) {
  std::ifstream in = open_in(path);
  AttackConfigFile file;
  AttackConfigFile::Section* cur = nullptr;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string where = path + ":" + std::to_string(line_no);
    line = strip(line);
    if (line.empty() || line[0] == '#' || line[0] == ';') continue;
    if (line.front() == '[') {
      if (line.back() != ']') raise(Errc::parse_error, where + ": unterminated section header");
      const std::string name = strip(line.substr(1, line.size() - 2));
      if (name.empty()) raise(Errc::parse_error, where + ": empty section name");
      if (name == "global") {
        cur = nullptr;
      } else {
        file.sections.push_back({name, name, {}});
        cur = &file.sections.back();
      }
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) raise(Errc::parse_error, where + ": expected key=value");
    const std::string key = strip(line.substr(0, eq));
    const std::string value = strip(line.substr(eq + 1));
    if (key.empty() || value.empty()) raise(Errc::parse_error, where + ": empty key or value");
    if (!cur) {
      if (key == "seed") {
        file.seed = static_cast<std::uint64_t>(parse_int(value, where));
      } else {
        raise(Errc::parse_error, where + ": unknown global key '" + key + "'");
      }
      continue;
    }
    if (key == "type") {
      cur->type = value;
    } else if (!cur->values.emplace(key, value).second) {
      raise(Errc::parse_error, where + ": duplicate key '" + key + "'");
    }
  }
  return file;
}

std::vector<AttackSpec> build_attack_specs(const AttackConfigFile& file,
                                           const SyntheticTask& task,
                                           std::uint64_t default_seed) {
  const std::uint64_t seed = file.seed.value_or(default_seed);

  AttackConfig base;
  base.epsilon = task.default_epsilon;
  base.alpha = task.default_epsilon / 4.0;
  base.iterations = 10;
  base.cw_iterations = 150;
  base.cw_box = std::make_pair(task.feature_min, task.feature_max);

  std::vector<AttackSpec> specs;
  for (const auto& section : file.sections) {
    const auto kind = parse_attack_kind(section.type);
    if (!kind)
      raise(Errc::parse_error, "unknown attack type '" + section.type + "' in section [" +
                                   section.name + "]");
    AttackSpec spec;
    spec.kind = *kind;
    spec.name = section.name;
    spec.config = base;
    spec.config.seed = mix_seed(seed, static_cast<std::uint64_t>(*kind));
    for (const auto& [key, value] : section.values) {
      const std::string where = "[" + section.name + "] " + key;
      AttackConfig& c = spec.config;
      if (key == "epsilon") c.epsilon = parse_double(value, where);
      else if (key == "alpha") c.alpha = parse_double(value, where);
      else if (key == "iterations") c.iterations = static_cast<int>(parse_int(value, where));
      else if (key == "overshoot") c.overshoot = parse_double(value, where);
      else if (key == "max_iter") c.deepfool_max_iter = static_cast<int>(parse_int(value, where));
      else if (key == "c") c.cw_c = parse_double(value, where);
      else if (key == "kappa") c.cw_kappa = parse_double(value, where);
      else if (key == "binary_search_steps")
        c.cw_binary_search_steps = static_cast<int>(parse_int(value, where));
      else if (key == "cw_iterations") c.cw_iterations = static_cast<int>(parse_int(value, where));
      else if (key == "step_size") c.cw_step = parse_double(value, where);
      else if (key == "box_min") c.cw_box->first = parse_double(value, where);
      else if (key == "box_max") c.cw_box->second = parse_double(value, where);
      else if (key == "th") c.uap_th = parse_double(value, where);
      else if (key == "max_epochs") c.uap_max_epochs = static_cast<int>(parse_int(value, where));
      else if (key == "gduap_iterations")
        c.gduap_iterations = static_cast<int>(parse_int(value, where));
      else if (key == "restarts") c.gduap_restarts = static_cast<int>(parse_int(value, where));
      else if (key == "seed") c.seed = static_cast<std::uint64_t>(parse_int(value, where));
      else raise(Errc::parse_error, where + ": unknown key");
    }
    specs.push_back(std::move(spec));
  }
  return specs;
}

// ---------------------------------------------------------------- reports

nlohmann::json report_to_json(const ComparisonReport& report, const RunMeta& meta) {
  json j;
  j["version"] = meta.version;
  j["seed"] = meta.seed;
  j["config"] = {{"semantic_threshold", report.config.semantic_threshold},
                 {"visual_threshold", report.config.visual_threshold},
                 {"k_grid", report.config.k_grid}};
  json rows = json::array();
  for (const auto& row : report.rows) {
    json r;
    r["attack"] = row.attack;
    r["model"] = row.model;
    r["records"] = row.record_count;
    r["fr"] = row.fr;
    json curve = json::array();
    for (const auto& [k, v] : row.curve) curve.push_back({{"k", k}, {"fr_at_k", v}});
    r["fr_curve"] = curve;
    r["auc"] = row.auc_value;
    r["mean_qi_wup"] = row.mean_qi_wup;
    r["mean_qi_vis"] = row.mean_qi_vis;
    if (row.dominant_coverage)
      r["dominant_label_coverage"] = *row.dominant_coverage;
    else
      r["dominant_label_coverage"] = nullptr;
    json fg = json::object();
    for (const auto& [name, cell] : row.fine_grained) {
      if (cell)
        fg[name] = *cell;
      else
        fg[name] = nullptr;
    }
    r["fine_grained_confusion"] = fg;
    rows.push_back(std::move(r));
  }
  j["rows"] = rows;
  return j;
}

std::string report_to_csv(const ComparisonReport& report) {
  std::ostringstream out;
  out << "attack,model,records,fr,auc,mean_qi_wup,mean_qi_vis,dominant_label_coverage";
  std::vector<std::string> subset_names;
  if (!report.rows.empty())
    for (const auto& [name, cell] : report.rows.front().fine_grained) {
      out << ",fg_" << name;
      subset_names.push_back(name);
    }
  out << "\n";
  for (const auto& row : report.rows) {
    out << row.attack << "," << row.model << "," << row.record_count << "," << fmt(row.fr)
        << "," << fmt(row.auc_value) << "," << fmt(row.mean_qi_wup) << ","
        << fmt(row.mean_qi_vis) << ",";
    if (row.dominant_coverage) out << fmt(*row.dominant_coverage);
    for (const auto& [name, cell] : row.fine_grained) {
      out << ",";
      if (cell) out << fmt(*cell);
    }
    out << "\n";
  }
  return out.str();
}

// ---------------------------------------------------------------- curves

void write_fr_curve_csv(const std::string& path,
                        const std::vector<std::pair<int, double>>& curve,
                        const RunMeta* meta) {
  std::ofstream out = open_out(path);
  if (meta) out << meta_comment(*meta) << "\n";
  out << "K,fr_at_k\n";
  for (const auto& [k, v] : curve) out << k << "," << fmt(v) << "\n";
}

void write_sweep_csv(const std::string& path,
                     const std::vector<std::pair<double, double>>& sweep,
                     const RunMeta* meta) {
  std::ofstream out = open_out(path);
  if (meta) out << meta_comment(*meta) << "\n";
  out << "threshold,mean_qi\n";
  for (const auto& [t, v] : sweep) out << fmt(t) << "," << fmt(v) << "\n";
}

void write_percentile_csv(const std::string& path,
                          const std::vector<std::pair<int, double>>& curve,
                          const RunMeta* meta) {
  std::ofstream out = open_out(path);
  if (meta) out << meta_comment(*meta) << "\n";
  out << "percentile,value\n";
  for (const auto& [p, v] : curve) out << p << "," << fmt(v) << "\n";
}

}  // namespace advmetrics
