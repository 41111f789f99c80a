#include "jabber/evalharness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>
#include <unordered_map>

#include "jabber/rng.hpp"
#include "jabber/util.hpp"

namespace jabber {

namespace fs = std::filesystem;

PromptTemplate PromptTemplate::load(const std::string& path) {
  PromptTemplate t;
  t.name = fs::path(path).stem().string();
  t.body = read_file(path);
  t.validate();
  return t;
}

PromptTemplate PromptTemplate::from_string(std::string name, std::string body) {
  PromptTemplate t{std::move(name), std::move(body)};
  t.validate();
  return t;
}

void PromptTemplate::validate() const {
  const std::size_t first = body.find("{TEXT}");
  if (first == std::string::npos)
    throw ConfigError("template '" + name + "' has no {TEXT} placeholder");
  if (body.find("{TEXT}", first + 1) != std::string::npos)
    throw ConfigError("template '" + name + "' has more than one {TEXT} placeholder");
}

std::string build_prompt(const PromptTemplate& tmpl, std::string_view text) {
  tmpl.validate();
  std::string out = tmpl.body;
  out.replace(out.find("{TEXT}"), 6, text);
  return out;
}

double cosine(const EmbeddingVector& u, const EmbeddingVector& v) {
  if (u.model_id != v.model_id)
    throw InputError("cosine: embedding models differ ('" + u.model_id + "' vs '" +
                     v.model_id + "')");
  if (u.values.size() != v.values.size())
    throw InputError("cosine: vector lengths differ");
  if (u.values.empty()) throw InputError("cosine: empty vectors");
  double dot = 0, nu = 0, nv = 0;
  for (std::size_t i = 0; i < u.values.size(); ++i) {
    dot += u.values[i] * v.values[i];
    nu += u.values[i] * u.values[i];
    nv += v.values[i] * v.values[i];
  }
  if (nu == 0.0 || nv == 0.0)
    throw InputError("cosine: zero-norm vector has no direction");
  return std::clamp(dot / (std::sqrt(nu) * std::sqrt(nv)), -1.0, 1.0);
}

std::vector<Passage> load_corpus_dir(const std::string& dir) {
  if (!fs::is_directory(dir)) throw InputError("corpus dir not found: " + dir);
  std::vector<Passage> passages;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file() || entry.path().extension() != ".txt") continue;
    passages.push_back({entry.path().stem().string(), read_file(entry.path().string())});
  }
  std::sort(passages.begin(), passages.end(),
            [](const Passage& a, const Passage& b) { return a.id < b.id; });
  if (passages.empty()) throw InputError("no .txt passages in " + dir);
  return passages;
}

nlohmann::json RunRecord::to_json() const {
  nlohmann::json j;
  j["v"] = v;
  j["id"] = id;
  j["passage_id"] = passage_id;
  j["original_text"] = original_text;
  j["transformed_text"] = transformed_text;
  j["template_name"] = template_name;
  j["model_id"] = model_id;
  j["translation"] = translation;
  if (similarity) j["similarity"] = *similarity;
  j["seed"] = seed;
  j["passage_seed"] = passage_seed;
  j["created_at"] = created_at;
  j["completed_at"] = completed_at;
  j["original_chars"] = original_chars;
  j["transformed_chars"] = transformed_chars;
  if (!label.empty()) j["label"] = label;
  if (!error.empty()) j["error"] = error;
  return j;
}

RunRecord RunRecord::from_json(const nlohmann::json& j) {
  RunRecord r;
  r.v = j.value("v", 1);
  r.id = j.value("id", "");
  r.passage_id = j.value("passage_id", "");
  r.original_text = j.value("original_text", "");
  r.transformed_text = j.value("transformed_text", "");
  r.template_name = j.value("template_name", "");
  r.model_id = j.value("model_id", "");
  r.translation = j.value("translation", "");
  if (j.contains("similarity")) r.similarity = j["similarity"].get<double>();
  r.seed = j.value("seed", std::uint64_t{0});
  r.passage_seed = j.value("passage_seed", std::uint64_t{0});
  r.created_at = j.value("created_at", "");
  r.completed_at = j.value("completed_at", "");
  r.original_chars = j.value("original_chars", std::size_t{0});
  r.transformed_chars = j.value("transformed_chars", std::size_t{0});
  r.label = j.value("label", "");
  r.error = j.value("error", "");
  return r;
}

std::string cache_key(std::string_view transformed, std::string_view template_name,
                      std::string_view model_id) {
  std::string joined;
  joined.reserve(transformed.size() + template_name.size() + model_id.size() + 2);
  joined.append(transformed);
  joined.push_back('\x1f');
  joined.append(template_name);
  joined.push_back('\x1f');
  joined.append(model_id);
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(fnv1a64(joined)));
  return buf;
}

std::vector<RunRecord> load_records(const std::string& path) {
  std::vector<RunRecord> records;
  if (!fs::exists(path)) return records;
  for (const std::string& line : split_lines(read_file(path))) {
    if (trim(line).empty()) continue;
    try {
      records.push_back(RunRecord::from_json(nlohmann::json::parse(line)));
    } catch (const nlohmann::json::exception&) {
      // A torn trailing line from an interrupted run; drop it. The
      // passage will simply run again.
      continue;
    }
  }
  return records;
}

std::vector<RunRecord> run_corpus(const std::vector<Passage>& passages,
                                  const RunOptions& options,
                                  const TransformFn& transform,
                                  const TranslateFn& translate,
                                  const EmbedFn& embed) {
  if (passages.empty()) throw InputError("run_corpus: no passages");
  options.tmpl.validate();
  const auto now = options.clock ? options.clock : [] { return iso8601_now(); };

  std::vector<RunRecord> done = load_records(options.records_path);
  std::unordered_map<std::string, std::size_t> scored;
  for (std::size_t i = 0; i < done.size(); ++i) {
    if (done[i].similarity) scored.emplace(done[i].id, i);
  }

  // Transform up front (cheap, pure) to know each passage's cache key.
  struct Job {
    const Passage* passage;
    std::string transformed;
    std::uint64_t passage_seed;
    std::string key;
  };
  std::vector<Job> jobs;
  std::vector<RunRecord> results;
  for (const Passage& p : passages) {
    const std::uint64_t pseed = splitmix_once(options.seed ^ fnv1a64(p.id));
    std::string transformed = transform(p, pseed);
    std::string key = cache_key(transformed, options.tmpl.name, options.model_id);
    if (auto it = scored.find(key); it != scored.end()) {
      results.push_back(done[it->second]);
      continue;
    }
    jobs.push_back({&p, std::move(transformed), pseed, std::move(key)});
  }

  std::ofstream out;
  if (!options.records_path.empty()) {
    const auto parent = fs::path(options.records_path).parent_path();
    if (!parent.empty()) fs::create_directories(parent);
    out.open(options.records_path, std::ios::app | std::ios::binary);
    if (!out) throw InputError("cannot open records file: " + options.records_path);
  }

  std::mutex write_mutex;
  std::atomic<std::size_t> next{0};
  std::vector<RunRecord> fresh(jobs.size());

  auto worker = [&] {
    while (true) {
      const std::size_t i = next.fetch_add(1);
      if (i >= jobs.size()) return;
      const Job& job = jobs[i];
      RunRecord r;
      r.id = job.key;
      r.passage_id = job.passage->id;
      r.original_text = job.passage->text;
      r.transformed_text = job.transformed;
      r.template_name = options.tmpl.name;
      r.model_id = options.model_id;
      r.seed = options.seed;
      r.passage_seed = job.passage_seed;
      r.label = options.label;
      r.created_at = now();
      r.original_chars = job.passage->text.size();
      r.transformed_chars = job.transformed.size();
      try {
        const std::string prompt = build_prompt(options.tmpl, job.transformed);
        r.translation = translate(*job.passage, prompt);
        const EmbeddingVector a = embed(job.passage->text);
        const EmbeddingVector b = embed(r.translation);
        r.similarity = cosine(a, b);
      } catch (const RemoteFailure& e) {
        r.error = e.what();
      } catch (const JabberError& e) {
        r.error = std::string("error: ") + e.what();
      }
      r.completed_at = now();

      std::lock_guard<std::mutex> lock(write_mutex);
      if (out.is_open()) {
        out << r.to_json().dump() << '\n';
        out.flush();
      }
      fresh[i] = std::move(r);
    }
  };

  const std::size_t n_threads =
      std::max<std::size_t>(1, std::min(options.concurrency, jobs.size()));
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < n_threads; ++t) pool.emplace_back(worker);
  for (std::thread& t : pool) t.join();

  for (RunRecord& r : fresh) results.push_back(std::move(r));
  return results;
}

namespace {

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string quoted = "\"";
  for (char c : s) {
    if (c == '"') quoted += "\"\"";
    else quoted += c;
  }
  quoted += "\"";
  return quoted;
}

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", x);
  return buf;
}

}  // namespace

Report summarize(const std::vector<RunRecord>& records) {
  std::map<std::string, std::vector<double>> by_condition;
  std::map<std::string, std::vector<double>> by_label;
  for (const RunRecord& r : records) {
    if (!r.similarity) continue;
    by_condition[r.template_name + "|" + r.model_id].push_back(*r.similarity);
    if (!r.label.empty()) by_label[r.label].push_back(*r.similarity);
  }
  if (by_condition.empty())
    throw InputError("summarize: no records carry a similarity score");

  Report report;
  for (auto& [condition, values] : by_condition) {
    SummaryRow row;
    row.condition = condition;
    row.count = static_cast<int>(values.size());
    std::sort(values.begin(), values.end());
    row.min = values.front();
    row.max = values.back();
    double sum = 0;
    for (double s : values) {
      sum += s;
      if (s < 0) {
        ++row.negatives;
        ++row.bins[0];
        continue;
      }
      const int bin = std::min(19, static_cast<int>(s * 20.0));
      ++row.bins[bin];
    }
    row.mean = sum / values.size();
    const std::size_t n = values.size();
    row.median = (n % 2 == 1) ? values[n / 2]
                              : (values[n / 2 - 1] + values[n / 2]) / 2.0;
    report.rows.push_back(row);
  }
  for (auto& [label, values] : by_label) {
    double sum = 0;
    for (double s : values) sum += s;
    report.markers.emplace_back(label, sum / values.size());
  }
  return report;
}

std::string Report::to_csv() const {
  std::ostringstream out;
  out << "condition,bin_start,bin_end,count\n";
  for (const SummaryRow& row : rows) {
    if (row.negatives > 0)
      out << csv_field(row.condition) << ",-1,0," << row.negatives << "\n";
    for (int b = 0; b < 20; ++b) {
      // Negative scores were folded into bin 0 for plotting; the CSV
      // keeps them only in the dedicated -1..0 row.
      int count = row.bins[b];
      if (b == 0) count -= row.negatives;
      out << csv_field(row.condition) << "," << fmt(b * 0.05) << ","
          << fmt((b + 1) * 0.05) << "," << count << "\n";
    }
  }
  return out.str();
}

std::string Report::to_svg() const {
  // Layout: one panel per condition, stacked vertically.
  const int panel_w = 640, panel_h = 190, margin = 40;
  const int chart_w = panel_w - 2 * margin;
  const int chart_h = 120;
  const int total_h = static_cast<int>(rows.size()) * panel_h + 20;

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << panel_w
      << "\" height=\"" << total_h << "\" viewBox=\"0 0 " << panel_w << " "
      << total_h << "\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

  int panel_y = 10;
  for (const SummaryRow& row : rows) {
    int max_count = 1;
    for (int c : row.bins) max_count = std::max(max_count, c);

    svg << "<text x=\"" << margin << "\" y=\"" << panel_y + 14
        << "\" font-family=\"sans-serif\" font-size=\"13\">" << row.condition
        << " (n=" << row.count << ", mean=" << fmt(row.mean)
        << ", median=" << fmt(row.median) << ", min=" << fmt(row.min)
        << ", max=" << fmt(row.max) << ")</text>\n";

    const int base_y = panel_y + 30 + chart_h;
    for (int b = 0; b < 20; ++b) {
      const double frac = static_cast<double>(row.bins[b]) / max_count;
      const int h = static_cast<int>(frac * chart_h);
      const int x = margin + b * chart_w / 20;
      const int w = chart_w / 20 - 2;
      svg << "<rect x=\"" << x << "\" y=\"" << base_y - h << "\" width=\"" << w
          << "\" height=\"" << h << "\" fill=\"#4878b0\"/>\n";
    }
    svg << "<line x1=\"" << margin << "\" y1=\"" << base_y << "\" x2=\""
        << margin + chart_w << "\" y2=\"" << base_y
        << "\" stroke=\"black\"/>\n";
    for (int tick = 0; tick <= 4; ++tick) {
      const int x = margin + tick * chart_w / 4;
      svg << "<text x=\"" << x << "\" y=\"" << base_y + 16
          << "\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"middle\">"
          << fmt(tick * 0.25) << "</text>\n";
    }
    // Named markers as dashed vertical lines across this panel.
    for (const auto& [label, score] : markers) {
      const double clamped = std::clamp(score, 0.0, 1.0);
      const int x = margin + static_cast<int>(clamped * chart_w);
      svg << "<line x1=\"" << x << "\" y1=\"" << panel_y + 30 << "\" x2=\"" << x
          << "\" y2=\"" << base_y
          << "\" stroke=\"#c0392b\" stroke-dasharray=\"4 3\"/>\n";
      svg << "<text x=\"" << x + 3 << "\" y=\"" << panel_y + 40
          << "\" font-family=\"sans-serif\" font-size=\"11\" fill=\"#c0392b\">"
          << label << "=" << fmt(score) << "</text>\n";
    }
    panel_y += panel_h;
  }
  svg << "</svg>\n";
  return svg.str();
}

}  // namespace jabber
