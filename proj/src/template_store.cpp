#include "iatr/template_store.hpp"

#include <fstream>
#include <map>
#include <sstream>

#include "iatr/error.hpp"
#include "iatr/text_io.hpp"
#include "json.hpp"

namespace iatr {
namespace {

using nlohmann::json;

constexpr const char* kFormatName = "iatr-template-store";

}  // namespace

std::string template_store_to_json(const IntermediateTemplateSet& tpl) {
  tpl.validate();
  json doc;
  doc["format"] = kFormatName;
  doc["version"] = kTemplateStoreVersion;
  doc["num_classes"] = tpl.num_classes();
  doc["dim"] = tpl.dim();
  doc["k"] = tpl.k;
  doc["labels"] = tpl.labels;
  json counts = json::array();
  json values = json::array();
  json provenance = json::array();
  for (std::size_t n = 0; n < tpl.num_classes(); ++n) {
    counts.push_back(tpl.template_count(n));
    for (double v : tpl.templates[n].values()) values.push_back(v);
    for (std::size_t p : tpl.provenance[n]) provenance.push_back(p);
  }
  doc["counts"] = std::move(counts);
  doc["templates"] = std::move(values);
  doc["provenance"] = std::move(provenance);
  return doc.dump(1);
}

IntermediateTemplateSet template_store_from_json(const std::string& document) {
  json doc;
  try {
    doc = json::parse(document);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("template store: ") + e.what());
  }
  try {
    if (doc.at("format").get<std::string>() != kFormatName)
      throw Error(ErrorCode::ParseError, "template store: unexpected format tag");
    const int version = doc.at("version").get<int>();
    if (version != kTemplateStoreVersion)
      throw Error(ErrorCode::ParseError, "template store: unsupported version " + std::to_string(version));

    IntermediateTemplateSet tpl;
    const auto classes = doc.at("num_classes").get<std::size_t>();
    const auto dims = doc.at("dim").get<std::size_t>();
    tpl.k = doc.at("k").get<std::size_t>();
    tpl.labels = doc.at("labels").get<std::vector<std::string>>();
    const auto counts = doc.at("counts").get<std::vector<std::size_t>>();
    const auto& values = doc.at("templates");
    const auto& provenance = doc.at("provenance");
    if (tpl.labels.size() != classes || counts.size() != classes)
      throw Error(ErrorCode::ParseError, "template store: class count mismatch");

    std::size_t offset = 0;
    for (std::size_t n = 0; n < classes; ++n) {
      Matrix block(counts[n], dims);
      std::vector<std::size_t> source(counts[n] * dims);
      if (offset + source.size() > values.size() || offset + source.size() > provenance.size())
        throw Error(ErrorCode::ParseError, "template store: tensor shorter than declared shape");
      for (std::size_t e = 0; e < source.size(); ++e) {
        block.values()[e] = values[offset + e].get<double>();
        source[e] = provenance[offset + e].get<std::size_t>();
      }
      offset += source.size();
      tpl.templates.push_back(std::move(block));
      tpl.provenance.push_back(std::move(source));
    }
    if (offset != values.size() || offset != provenance.size())
      throw Error(ErrorCode::ParseError, "template store: tensor longer than declared shape");
    tpl.validate();
    return tpl;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("template store: ") + e.what());
  }
}

void write_template_store_csv(std::ostream& out, const IntermediateTemplateSet& tpl) {
  tpl.validate();
  out << "class,template_index,dim,value,source_instance\n";
  for (std::size_t n = 0; n < tpl.num_classes(); ++n) {
    text::require_plain_field(tpl.labels[n], "class label");
    for (std::size_t r = 0; r < tpl.template_count(n); ++r)
      for (std::size_t l = 0; l < tpl.dim(); ++l)
        out << tpl.labels[n] << ',' << r << ',' << l << ',' << text::format_double(tpl.templates[n](r, l)) << ','
            << tpl.source_index(n, r, l) << '\n';
  }
}

IntermediateTemplateSet read_template_store_csv(std::istream& in) {
  struct Cell {
    double value;
    std::size_t source;
  };
  std::string line;
  if (!std::getline(in, line) || text::trim(line) != "class,template_index,dim,value,source_instance")
    throw Error(ErrorCode::ParseError, "template CSV: missing or unexpected header");

  std::vector<std::string> order;
  std::map<std::string, std::map<std::pair<std::size_t, std::size_t>, Cell>> cells;
  std::size_t dims = 0;
  std::size_t row_no = 1;
  while (std::getline(in, line)) {
    ++row_no;
    if (text::trim(line).empty()) continue;
    const auto f = text::split_csv(line);
    const std::string ctx = "template CSV row " + std::to_string(row_no);
    if (f.size() != 5) throw Error(ErrorCode::ParseError, ctx + ": expected 5 fields");
    std::string label(text::trim(f[0]));
    const auto r = text::parse_size(f[1], ctx);
    const auto l = text::parse_size(f[2], ctx);
    const Cell cell{text::parse_double(f[3], ctx), text::parse_size(f[4], ctx)};
    if (!cells.contains(label)) order.push_back(label);
    if (!cells[label].emplace(std::pair{r, l}, cell).second)
      throw Error(ErrorCode::ParseError, ctx + ": duplicate cell");
    dims = std::max(dims, l + 1);
  }
  if (order.empty()) throw Error(ErrorCode::ParseError, "template CSV: no rows");

  IntermediateTemplateSet tpl;
  tpl.labels = order;
  std::size_t min_rows = 0;
  for (const auto& label : order) {
    const auto& c = cells[label];
    if (c.size() % dims != 0) throw Error(ErrorCode::ParseError, "template CSV: incomplete class '" + label + "'");
    const std::size_t rows = c.size() / dims;
    Matrix block(rows, dims);
    std::vector<std::size_t> source(rows * dims);
    for (std::size_t r = 0; r < rows; ++r) {
      for (std::size_t l = 0; l < dims; ++l) {
        const auto it = c.find({r, l});
        if (it == c.end()) throw Error(ErrorCode::ParseError, "template CSV: missing cell in class '" + label + "'");
        block(r, l) = it->second.value;
        source[r * dims + l] = it->second.source;
      }
    }
    min_rows = tpl.templates.empty() ? rows : std::min(min_rows, rows);
    tpl.templates.push_back(std::move(block));
    tpl.provenance.push_back(std::move(source));
  }
  tpl.k = min_rows;
  tpl.validate();
  return tpl;
}

void save_template_store(const std::filesystem::path& path, const IntermediateTemplateSet& tpl) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::MissingFile, "cannot write " + path.string());
  if (path.extension() == ".csv")
    write_template_store_csv(out, tpl);
  else
    out << template_store_to_json(tpl) << '\n';
}

IntermediateTemplateSet load_template_store(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::MissingFile, "cannot open template store " + path.string());
  if (path.extension() == ".csv") return read_template_store_csv(in);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return template_store_from_json(buffer.str());
}

}  // namespace iatr
