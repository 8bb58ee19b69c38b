#include "litrag/serialize.hpp"

#include "litrag/error.hpp"

namespace litrag {

namespace {

template <typename T>
T field(const json& j, const char* key, T fallback) {
  if (!j.contains(key) || j[key].is_null()) return fallback;
  try {
    return j[key].get<T>();
  } catch (const json::exception&) {
    throw ValidationError(std::string("field \"") + key + "\" has the wrong type");
  }
}

json optional_string(const std::optional<std::string>& s) { return s ? json(*s) : json(nullptr); }

}  // namespace

void to_json(json& j, const DocumentMetadata& m) {
  j = json{{"doc_id", m.doc_id},
           {"title", m.title},
           {"authors", m.authors},
           {"journal", m.journal},
           {"doi", m.doi},
           {"year", m.year ? json(*m.year) : json(nullptr)},
           {"doc_type", to_string(m.doc_type)},
           {"source_url", optional_string(m.source_url)},
           {"volume", m.volume},
           {"issue", m.issue},
           {"pages", m.pages}};
}

void from_json(const json& j, DocumentMetadata& m) {
  if (!j.is_object()) throw ValidationError("document metadata must be a JSON object");
  m.doc_id = field<std::string>(j, "doc_id", "");
  if (m.doc_id.empty()) throw ValidationError("document metadata lacks doc_id");
  m.title = field<std::string>(j, "title", "");
  m.authors = field<std::vector<std::string>>(j, "authors", {});
  m.journal = field<std::string>(j, "journal", "");
  m.doi = field<std::string>(j, "doi", "");
  if (j.contains("year") && !j["year"].is_null()) m.year = field<int>(j, "year", 0);
  if (!j.contains("doc_type")) throw ValidationError(m.doc_id + ": missing doc_type");
  m.doc_type = parse_doc_type(field<std::string>(j, "doc_type", ""));
  if (j.contains("source_url") && !j["source_url"].is_null()) m.source_url = field<std::string>(j, "source_url", "");
  // Numbers are accepted for the bibliographic fields as well.
  for (auto [key, slot] : {std::pair{"volume", &m.volume}, std::pair{"issue", &m.issue}, std::pair{"pages", &m.pages}}) {
    if (!j.contains(key) || j[key].is_null()) continue;
    *slot = j[key].is_string() ? j[key].get<std::string>() : j[key].dump();
  }
  validate(m);
}

void to_json(json& j, const Chunk& c) {
  j = json{{"chunk_id", c.chunk_id}, {"doc_id", c.doc_id},   {"heading_path", c.heading_path},
           {"level", c.level},       {"text", c.text},       {"char_count", c.char_count}};
}

void to_json(json& j, const MoleculeRecord& m) {
  j = json{{"name", m.name}, {"smiles", m.smiles}, {"detail_url", optional_string(m.detail_url)}};
}

void from_json(const json& j, MoleculeRecord& m) {
  m.name = field<std::string>(j, "name", "");
  m.smiles = field<std::string>(j, "smiles", "");
  if (j.contains("detail_url") && !j["detail_url"].is_null()) m.detail_url = j["detail_url"].get<std::string>();
  if (j.contains("url") && !j["url"].is_null()) m.detail_url = j["url"].get<std::string>();
}

void to_json(json& j, const Citation& c) {
  j = json{{"ref_index", c.ref_index}, {"doc_id", c.doc_id}, {"formatted", c.formatted}, {"url", optional_string(c.url)}};
}

void from_json(const json& j, Citation& c) {
  c.ref_index = j.at("ref_index").get<int>();
  c.doc_id = j.at("doc_id").get<std::string>();
  c.formatted = j.at("formatted").get<std::string>();
  if (j.contains("url") && !j["url"].is_null()) c.url = j["url"].get<std::string>();
}

void to_json(json& j, const Hit& h) {
  j = json{{"chunk_id", h.chunk_id},
           {"doc_id", h.doc_id},
           {"score", h.score},
           {"matched_kind", h.matched_kind == MatchKind::kChunk ? "chunk" : "question"},
           {"matched_id", h.matched_id}};
}

void to_json(json& j, const SearchParams& p) {
  j = json{{"summary_limit", p.summary_limit},
           {"chunk_limit", p.chunk_limit},
           {"min_score", p.min_score},
           {"doc_type_filter", p.doc_type_filter ? json(to_string(*p.doc_type_filter)) : json(nullptr)}};
}

void to_json(json& j, const StoreStats& s) {
  j = json{{"docs", s.docs}, {"chunks", s.chunks}, {"questions", s.questions}};
}

void to_json(json& j, const QAResponse& r) {
  json events = json::array();
  for (const auto& e : r.events) {
    json payload;
    std::visit([&](const auto& p) { payload = p; }, e.payload);
    events.push_back({{"type", to_string(e.kind)}, {"payload", payload}});
  }
  j = json{{"events", events},       {"answer_text", r.answer_text}, {"citations", r.citations},
           {"molecules", r.molecules}, {"trace", r.trace},           {"warnings", r.warnings},
           {"session_id", optional_string(r.session_id)}};
}

void to_json(json& j, const ResearchReport& r) {
  json subs = json::array();
  for (const auto& sa : r.sub_answers) subs.push_back({{"question", sa.question}, {"response", sa.response}});
  json failures = json::array();
  for (const auto& f : r.failures) failures.push_back({{"question", f.question}, {"error", f.error}});
  j = json{{"topic", r.topic},
           {"overview", r.overview},
           {"overview_citations", r.overview_citations},
           {"subquestions", r.subquestions},
           {"sub_answers", subs},
           {"failures", failures},
           {"synthesis", r.synthesis},
           {"bibliography", r.bibliography},
           {"warnings", r.warnings}};
}

void to_json(json& j, const IngestSummary& s) {
  j = json{{"documents", s.documents}, {"skipped", s.skipped},   {"chunks", s.chunks},
           {"questions", s.questions}, {"warnings", s.warnings}};
}

SearchParams search_params_from_json(const json& j, SearchParams p) {
  if (j.is_null()) return p;
  if (!j.is_object()) throw ValidationError("params must be an object");
  p.summary_limit = field<int>(j, "summary_limit", p.summary_limit);
  p.chunk_limit = field<int>(j, "chunk_limit", p.chunk_limit);
  p.min_score = field<double>(j, "min_score", p.min_score);
  if (j.contains("doc_type_filter") && !j["doc_type_filter"].is_null()) {
    p.doc_type_filter = parse_doc_type(field<std::string>(j, "doc_type_filter", ""));
  }
  validate(p);
  return p;
}

QARequest qa_request_from_json(const json& j, const SearchParams& defaults) {
  if (!j.is_object()) throw ValidationError("request body must be a JSON object");
  QARequest r;
  r.query = field<std::string>(j, "query", "");
  r.params = search_params_from_json(j.value("params", json(nullptr)), defaults);
  if (j.contains("session_id") && !j["session_id"].is_null()) r.session_id = field<std::string>(j, "session_id", "");
  validate(r);
  return r;
}

ResearchRequest research_request_from_json(const json& j, const SearchParams& defaults) {
  if (!j.is_object()) throw ValidationError("request body must be a JSON object");
  ResearchRequest r;
  r.topic = field<std::string>(j, "topic", "");
  r.max_subquestions = field<int>(j, "max_subquestions", r.max_subquestions);
  r.params = search_params_from_json(j.value("params", json(nullptr)), defaults);
  validate(r);
  return r;
}

namespace eval {

void to_json(json& j, const EvalReport& r) {
  auto tally = [](const Tally& t) {
    return json{{"accuracy", t.accuracy()}, {"correct", t.correct}, {"trials", t.trials}, {"parse_failed", t.parse_failed}};
  };
  json models = json::object();
  for (const auto& [key, t] : r.per_model) {
    json disc = json::object();
    for (const auto& [d, dt] : r.per_discipline.at(key)) disc[d] = tally(dt);
    models[key] = tally(t);
    models[key]["per_discipline"] = disc;
  }
  j = json{{"refined_qids", r.refined_qids}, {"models", models}};
}

}  // namespace eval

}  // namespace litrag
