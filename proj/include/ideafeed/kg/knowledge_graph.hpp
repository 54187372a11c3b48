#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "ideafeed/error.hpp"

namespace ideafeed::kg {

struct KnowledgeEdge {
  std::string relation;
  std::string start;
  std::string end;
  double weight = 1.0;

  friend bool operator==(const KnowledgeEdge&, const KnowledgeEdge&) = default;
};

inline const std::set<std::string, std::less<>>& default_excluded_relations() {
  static const std::set<std::string, std::less<>> kExcluded = {
      "Synonym",  "Antonym", "DerivedFrom",  "SymbolOf", "DefinedAs", "MannerOf",
      "EtymologicallyRelatedTo", "EtymologicallyDerivedFrom", "ExternalURL"};
  return kExcluded;
}

struct RelationFilter {
  std::set<std::string, std::less<>> excluded = default_excluded_relations();

  static RelationFilter allow_all() { return RelationFilter{{}}; }

  bool allows(std::string_view relation) const { return !excluded.contains(relation); }
};

struct RelatedTerm {
  std::string term;
  std::string relation;
  double weight = 0.0;

  friend bool operator==(const RelatedTerm&, const RelatedTerm&) = default;
};

struct IngestStats {
  std::size_t edges = 0;      // edges added (after de-duplication)
  std::size_t lines = 0;      // data lines seen, excluding comments and blanks
  std::size_t malformed = 0;  // data lines skipped
  std::size_t comments = 0;
  std::size_t duplicates = 0;
};

inline std::string to_lower_ascii(std::string_view s) {
  std::string out(s);
  for (char& c : out)
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  return out;
}

inline std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

/// Shortest decimal that round-trips to the same double.
inline std::string format_weight(double w) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), w);
  return std::string(buf, ptr);
}

/// Term-relation graph. Edges are keyed by (start, relation, end); a repeated
/// key keeps the larger weight. Iteration is always in sorted key order.
class KnowledgeGraph {
 public:
  using EdgeKey = std::tuple<std::string, std::string, std::string>;  // start, relation, end

  /// Adds an edge; returns false for an invalid or duplicate key.
  bool add(KnowledgeEdge edge) {
    edge.start = to_lower_ascii(trim(edge.start));
    edge.end = to_lower_ascii(trim(edge.end));
    edge.relation = std::string(trim(edge.relation));
    if (edge.relation.empty() || edge.start.empty() || edge.end.empty() || !std::isfinite(edge.weight) ||
        edge.weight < 0.0)
      return false;
    EdgeKey key{edge.start, edge.relation, edge.end};
    auto [it, inserted] = edges_.try_emplace(key, edge.weight);
    if (!inserted) {
      it->second = std::max(it->second, edge.weight);
      return false;
    }
    adjacency_[edge.start].insert(key);
    adjacency_[edge.end].insert(key);
    return true;
  }

  bool contains(std::string_view term) const { return adjacency_.find(term) != adjacency_.end(); }
  std::size_t edge_count() const noexcept { return edges_.size(); }
  std::size_t term_count() const noexcept { return adjacency_.size(); }

  std::vector<KnowledgeEdge> edges() const {
    std::vector<KnowledgeEdge> out;
    out.reserve(edges_.size());
    for (const auto& [key, w] : edges_) out.push_back({std::get<1>(key), std::get<0>(key), std::get<2>(key), w});
    return out;
  }

  /// Every edge touching `term`, in key order.
  std::vector<KnowledgeEdge> edges_of(std::string_view term) const {
    std::vector<KnowledgeEdge> out;
    auto it = adjacency_.find(term);
    if (it == adjacency_.end()) return out;
    for (const auto& key : it->second)
      out.push_back({std::get<1>(key), std::get<0>(key), std::get<2>(key), edges_.at(key)});
    return out;
  }

  /// Neighbors of `term` in either direction through allowed relations,
  /// one entry per neighbor (max weight wins, then the smaller relation
  /// label), sorted by descending weight then term.
  std::vector<RelatedTerm> related_words(std::string_view term, const RelationFilter& filter = {}) const {
    const std::string needle = to_lower_ascii(trim(term));
    std::map<std::string, RelatedTerm, std::less<>> best;
    for (const auto& e : edges_of(needle)) {
      if (!filter.allows(e.relation)) continue;
      const std::string& other = e.start == needle ? e.end : e.start;
      if (other == needle) continue;
      auto [it, inserted] = best.try_emplace(other, RelatedTerm{other, e.relation, e.weight});
      if (!inserted && (e.weight > it->second.weight ||
                        (e.weight == it->second.weight && e.relation < it->second.relation)))
        it->second = RelatedTerm{other, e.relation, e.weight};
    }
    std::vector<RelatedTerm> out;
    out.reserve(best.size());
    for (auto& [_, r] : best) out.push_back(std::move(r));
    std::stable_sort(out.begin(), out.end(), [](const RelatedTerm& a, const RelatedTerm& b) {
      return a.weight != b.weight ? a.weight > b.weight : a.term < b.term;
    });
    return out;
  }

  void export_tsv(std::ostream& out) const {
    for (const auto& [key, w] : edges_)
      out << std::get<1>(key) << '\t' << std::get<0>(key) << '\t' << std::get<2>(key) << '\t' << format_weight(w)
          << '\n';
  }

  std::string to_tsv() const {
    std::ostringstream os;
    export_tsv(os);
    return os.str();
  }

  /// Parses `relation<TAB>start<TAB>end<TAB>weight` lines; '#' lines are
  /// comments. Malformed lines are skipped and counted.
  static KnowledgeGraph ingest(std::istream& in, IngestStats* stats_out = nullptr) {
    KnowledgeGraph g;
    IngestStats stats;
    std::string line;
    while (std::getline(in, line)) {
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (trim(line).empty()) continue;
      if (line.front() == '#') {
        ++stats.comments;
        continue;
      }
      ++stats.lines;
      auto edge = parse_line(line);
      if (!edge) {
        ++stats.malformed;
        continue;
      }
      if (g.add(std::move(*edge)))
        ++stats.edges;
      else
        ++stats.duplicates;
    }
    if (stats.lines > 0 && stats.malformed == stats.lines)
      throw Error(Errc::all_lines_malformed, std::to_string(stats.lines) + " data lines, none parseable");
    if (stats_out) *stats_out = stats;
    return g;
  }

  static KnowledgeGraph ingest_file(const std::filesystem::path& path, IngestStats* stats = nullptr) {
    std::ifstream in(path);
    if (!in) throw Error(Errc::io_failure, "cannot read edge file " + path.string());
    return ingest(in, stats);
  }

  static std::optional<KnowledgeEdge> parse_line(std::string_view line) {
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    while (true) {
      const auto tab = line.find('\t', start);
      fields.push_back(line.substr(start, tab == std::string_view::npos ? std::string_view::npos : tab - start));
      if (tab == std::string_view::npos) break;
      start = tab + 1;
    }
    if (fields.size() != 4) return std::nullopt;
    const auto weight_text = trim(fields[3]);
    double weight = 0.0;
    auto [ptr, ec] = std::from_chars(weight_text.data(), weight_text.data() + weight_text.size(), weight);
    if (ec != std::errc{} || ptr != weight_text.data() + weight_text.size() || !std::isfinite(weight) ||
        weight < 0.0)
      return std::nullopt;
    KnowledgeEdge e{std::string(trim(fields[0])), std::string(trim(fields[1])), std::string(trim(fields[2])), weight};
    if (e.relation.empty() || e.start.empty() || e.end.empty()) return std::nullopt;
    return e;
  }

 private:
  std::map<EdgeKey, double> edges_;
  std::map<std::string, std::set<EdgeKey>, std::less<>> adjacency_;
};

}  // namespace ideafeed::kg
