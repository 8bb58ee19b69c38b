#pragma once

#include <nlohmann/json.hpp>

#include "litrag/corpus.hpp"
#include "litrag/eval.hpp"
#include "litrag/ingest.hpp"
#include "litrag/qa.hpp"
#include "litrag/research.hpp"
#include "litrag/vector_store.hpp"

namespace litrag {

using json = nlohmann::json;

void to_json(json& j, const DocumentMetadata& m);
void from_json(const json& j, DocumentMetadata& m);
void to_json(json& j, const Chunk& c);
void to_json(json& j, const MoleculeRecord& m);
void from_json(const json& j, MoleculeRecord& m);
void to_json(json& j, const Citation& c);
void from_json(const json& j, Citation& c);
void to_json(json& j, const Hit& h);
void to_json(json& j, const SearchParams& p);
void to_json(json& j, const StoreStats& s);
void to_json(json& j, const QAResponse& r);
void to_json(json& j, const ResearchReport& r);
void to_json(json& j, const IngestSummary& s);

/// Missing keys keep defaults; throws ValidationError on bad values.
SearchParams search_params_from_json(const json& j, SearchParams defaults);
QARequest qa_request_from_json(const json& j, const SearchParams& defaults);
ResearchRequest research_request_from_json(const json& j, const SearchParams& defaults);

namespace eval {
void to_json(json& j, const EvalReport& r);
}

}  // namespace litrag
