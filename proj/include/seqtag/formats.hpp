#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "seqtag/document.hpp"

namespace seqtag::corpus {

// Maps foreign type strings ("Gene/Protein") onto the closed entity-type
// set. Loaded from a key=value text file; '#' starts a comment.
using TypeAliasTable = std::map<std::string, std::string>;

TypeAliasTable load_alias_table(std::istream& in);
TypeAliasTable load_alias_table_file(const std::string& path);

std::optional<EntityType> map_entity_type(const std::string& raw,
                                          const TypeAliasTable& aliases);

// PubTator: "PMID|t|title", "PMID|a|abstract", then tab-separated
// annotation lines "PMID\tstart\tend\tmention\ttype". Records separated
// by blank lines. Document text is title + "\n" + abstract. Annotations
// whose mention does not match the text slice are skipped with a warning.
std::vector<Document> parse_pubtator(std::istream& in, const TypeAliasTable& aliases = {},
                                     Diag* diag = nullptr);

enum class ConllScheme { IOB2, IOBES };

// CoNLL: "token\tlabel" lines, blank line between sentences, optional
// "-DOCSTART-" document separators. Text is reconstructed by joining
// tokens with single spaces; documents come back pre-tokenized.
std::vector<Document> parse_conll(std::istream& in, ConllScheme scheme,
                                  const TypeAliasTable& aliases = {}, Diag* diag = nullptr);

// IOBES token/label lines for one tokenized document, one blank line
// between sentences.
void write_conll(const Document& doc, EntityType etype, std::ostream& out,
                 Diag* diag = nullptr);

// Corpus-level writer: documents separated by -DOCSTART- markers so that
// parse_conll recovers the document structure.
void write_conll_corpus(const std::vector<Document>& docs, EntityType etype,
                        std::ostream& out, Diag* diag = nullptr);

// Harmonized corpus files: one JSON object per line with fields
// {"id", "text", "split", "annotations": [{"start","end","type","text"}]}.
std::string harmonized_line(const Document& doc);
void write_harmonized(const std::vector<Document>& docs, std::ostream& out);
std::vector<Document> read_harmonized(std::istream& in);
std::vector<Document> read_harmonized_file(const std::string& path);
void write_harmonized_file(const std::vector<Document>& docs, const std::string& path);

}  // namespace seqtag::corpus
