#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include "iatr/iatr.hpp"

namespace iatr {

inline constexpr int kTemplateStoreVersion = 1;

/// Versioned JSON document: num_classes, dim, k, labels, per-class template
/// counts, the template tensor flattened row-major over (class, row, dim) and
/// the matching provenance indices. Doubles use shortest round-trip decimals,
/// so save/load is bit-exact. The mean-distance cache is not persisted.
std::string template_store_to_json(const IntermediateTemplateSet& tpl);
IntermediateTemplateSet template_store_from_json(const std::string& document);

/// CSV alternative with columns class,template_index,dim,value,source_instance.
/// Classes appear in store order.
void write_template_store_csv(std::ostream& out, const IntermediateTemplateSet& tpl);
IntermediateTemplateSet read_template_store_csv(std::istream& in);

/// Format chosen by extension: ".csv" selects CSV, anything else JSON.
void save_template_store(const std::filesystem::path& path, const IntermediateTemplateSet& tpl);
IntermediateTemplateSet load_template_store(const std::filesystem::path& path);

}  // namespace iatr
