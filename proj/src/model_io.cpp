#include "reanalysis/model_io.hpp"

#include <fstream>
#include <initializer_list>
#include <sstream>

#include "reanalysis/errors.hpp"

namespace reanalysis {

using nlohmann::json;

namespace {

constexpr const char* kFormat = "reanalysis-model";
constexpr int kVersion = 1;

[[noreturn]] void violation(const std::string& where, const std::string& what) {
  throw Error(ErrorKind::SchemaViolation, where + ": " + what);
}

const json& field(const json& obj, const char* key, const std::string& where) {
  if (!obj.is_object()) violation(where, "expected an object");
  auto it = obj.find(key);
  if (it == obj.end()) violation(where, std::string("missing '") + key + "'");
  return *it;
}

double number(const json& obj, const char* key, const std::string& where) {
  const json& v = field(obj, key, where);
  if (!v.is_number()) violation(where + "." + key, "expected a number");
  return v.get<double>();
}

int integer(const json& obj, const char* key, const std::string& where) {
  const json& v = field(obj, key, where);
  if (!v.is_number_integer()) violation(where + "." + key, "expected an integer");
  return v.get<int>();
}

std::string text(const json& obj, const char* key, const std::string& where) {
  const json& v = field(obj, key, where);
  if (!v.is_string()) violation(where + "." + key, "expected a string");
  return v.get<std::string>();
}

const json& array(const json& obj, const char* key, const std::string& where) {
  const json& v = field(obj, key, where);
  if (!v.is_array()) violation(where + "." + key, "expected an array");
  return v;
}

// The schema closes every object; extra keys are usually typos.
void only_keys(const json& obj, std::initializer_list<const char*> keys, const std::string& where) {
  if (!obj.is_object()) violation(where, "expected an object");
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool known = false;
    for (const char* k : keys) known = known || it.key() == k;
    if (!known) violation(where, "unknown key '" + it.key() + "'");
  }
}

// Enum parsers throw InvalidParameter; inside a document that is a schema problem.
template <class F>
auto parse_enum(F&& parse, const std::string& value, const std::string& where) {
  try {
    return parse(value);
  } catch (const Error&) {
    violation(where, "unknown value '" + value + "'");
  }
}

}  // namespace

json model_to_json(const StructuralModel& model, const std::optional<PartitionSpec>& partition) {
  json doc;
  doc["format"] = kFormat;
  doc["version"] = kVersion;
  doc["dofs_per_node"] = model.dofs_per_node();
  if (const auto& layout = model.layout()) {
    doc["layout"] = {{"structure", to_string(layout->structure)},
                     {"n_span", layout->n_span},
                     {"n_floor", layout->n_floor},
                     {"n_sb", layout->n_sb},
                     {"n_sc", layout->n_sc},
                     {"span", layout->span},
                     {"height", layout->height}};
  }
  json nodes = json::array();
  for (const auto& n : model.nodes()) nodes.push_back({{"id", n.id}, {"x", n.x}, {"y", n.y}});
  doc["nodes"] = std::move(nodes);

  json elements = json::array();
  for (const auto& e : model.elements()) {
    json material = {{"youngs", e.material.youngs}};
    if (e.kind == ElementKind::FgBeam) {
      material["graded"] = {{"e_upper", e.material.graded.e_upper},
                            {"e_lower", e.material.graded.e_lower},
                            {"exponent", e.material.graded.exponent}};
    }
    if (e.material.bilinear) {
      material["bilinear"] = {{"e0", e.material.bilinear->e0},
                              {"et", e.material.bilinear->et},
                              {"sigma_y", e.material.bilinear->sigma_y}};
    }
    elements.push_back({{"id", e.id},
                        {"kind", to_string(e.kind)},
                        {"nodes", {e.node_i, e.node_j}},
                        {"section",
                         {{"area", e.section.area},
                          {"inertia", e.section.inertia},
                          {"width", e.section.width},
                          {"height", e.section.height}}},
                        {"material", std::move(material)},
                        {"tag",
                         {{"member", to_string(e.tag.member)},
                          {"floor", e.tag.floor},
                          {"span", e.tag.span},
                          {"segment", e.tag.segment}}}});
  }
  doc["elements"] = std::move(elements);

  json supports = json::array();
  for (const auto& [node, dofs] : model.supports()) {
    supports.push_back({{"node", node}, {"dofs", json(std::vector<int>(dofs.begin(), dofs.end()))}});
  }
  doc["supports"] = std::move(supports);

  json loads = json::array();
  for (const auto& l : model.loads()) loads.push_back({{"node", l.node}, {"dof", l.dof}, {"value", l.value}});
  doc["loads"] = std::move(loads);

  if (partition) {
    doc["partition"] = {
        {"additional", std::vector<int>(partition->additional_ids.begin(), partition->additional_ids.end())}};
  }
  return doc;
}

ModelDocument model_from_json(const json& doc) {
  only_keys(doc, {"format", "version", "dofs_per_node", "layout", "nodes", "elements", "supports", "loads", "partition"},
            "$");
  if (text(doc, "format", "$") != kFormat) violation("$.format", "not a model document");
  if (integer(doc, "version", "$") != kVersion) violation("$.version", "unsupported version");
  const int dpn = integer(doc, "dofs_per_node", "$");
  if (dpn != 2 && dpn != 3) violation("$.dofs_per_node", "must be 2 or 3");

  std::optional<GridLayout> layout;
  if (auto it = doc.find("layout"); it != doc.end()) {
    const std::string w = "$.layout";
    only_keys(*it, {"structure", "n_span", "n_floor", "n_sb", "n_sc", "span", "height"}, w);
    GridLayout g;
    g.structure = parse_enum(structure_kind_from_string, text(*it, "structure", w), w + ".structure");
    g.n_span = integer(*it, "n_span", w);
    g.n_floor = integer(*it, "n_floor", w);
    g.n_sb = integer(*it, "n_sb", w);
    g.n_sc = integer(*it, "n_sc", w);
    g.span = number(*it, "span", w);
    g.height = number(*it, "height", w);
    layout = g;
  }

  std::vector<Node> nodes;
  const json& jn = array(doc, "nodes", "$");
  for (std::size_t i = 0; i < jn.size(); ++i) {
    const std::string w = "$.nodes[" + std::to_string(i) + "]";
    only_keys(jn[i], {"id", "x", "y"}, w);
    nodes.push_back(Node{integer(jn[i], "id", w), number(jn[i], "x", w), number(jn[i], "y", w)});
  }

  std::vector<ElementRecord> elements;
  const json& je = array(doc, "elements", "$");
  for (std::size_t i = 0; i < je.size(); ++i) {
    const std::string w = "$.elements[" + std::to_string(i) + "]";
    const json& j = je[i];
    only_keys(j, {"id", "kind", "nodes", "section", "material", "tag"}, w);
    ElementRecord e;
    e.id = integer(j, "id", w);
    e.kind = parse_enum(element_kind_from_string, text(j, "kind", w), w + ".kind");
    const json& ends = array(j, "nodes", w);
    if (ends.size() != 2 || !ends[0].is_number_integer() || !ends[1].is_number_integer()) {
      violation(w + ".nodes", "expected two node ids");
    }
    e.node_i = ends[0].get<int>();
    e.node_j = ends[1].get<int>();

    const json& s = field(j, "section", w);
    only_keys(s, {"area", "inertia", "width", "height"}, w + ".section");
    e.section = SectionSpec{number(s, "area", w + ".section"), number(s, "inertia", w + ".section"),
                            number(s, "width", w + ".section"), number(s, "height", w + ".section")};

    const json& m = field(j, "material", w);
    only_keys(m, {"youngs", "graded", "bilinear"}, w + ".material");
    e.material.youngs = number(m, "youngs", w + ".material");
    if (auto g = m.find("graded"); g != m.end()) {
      const std::string wg = w + ".material.graded";
      only_keys(*g, {"e_upper", "e_lower", "exponent"}, wg);
      e.material.graded = FgProfile{number(*g, "e_upper", wg), number(*g, "e_lower", wg), number(*g, "exponent", wg)};
    } else if (e.kind == ElementKind::FgBeam) {
      violation(w + ".material", "fg_beam needs 'graded'");
    }
    if (auto b = m.find("bilinear"); b != m.end()) {
      const std::string wb = w + ".material.bilinear";
      only_keys(*b, {"e0", "et", "sigma_y"}, wb);
      e.material.bilinear = BilinearLaw{number(*b, "e0", wb), number(*b, "et", wb), number(*b, "sigma_y", wb)};
    }

    const json& t = field(j, "tag", w);
    only_keys(t, {"member", "floor", "span", "segment"}, w + ".tag");
    e.tag.member = parse_enum(member_kind_from_string, text(t, "member", w + ".tag"), w + ".tag.member");
    e.tag.floor = integer(t, "floor", w + ".tag");
    e.tag.span = integer(t, "span", w + ".tag");
    e.tag.segment = integer(t, "segment", w + ".tag");
    elements.push_back(e);
  }

  std::map<int, std::set<int>> supports;
  const json& js = array(doc, "supports", "$");
  for (std::size_t i = 0; i < js.size(); ++i) {
    const std::string w = "$.supports[" + std::to_string(i) + "]";
    only_keys(js[i], {"node", "dofs"}, w);
    auto& dofs = supports[integer(js[i], "node", w)];
    for (const auto& d : array(js[i], "dofs", w)) {
      if (!d.is_number_integer()) violation(w + ".dofs", "expected integers");
      dofs.insert(d.get<int>());
    }
  }

  std::vector<NodalLoad> loads;
  const json& jl = array(doc, "loads", "$");
  for (std::size_t i = 0; i < jl.size(); ++i) {
    const std::string w = "$.loads[" + std::to_string(i) + "]";
    only_keys(jl[i], {"node", "dof", "value"}, w);
    loads.push_back(NodalLoad{integer(jl[i], "node", w), integer(jl[i], "dof", w), number(jl[i], "value", w)});
  }

  std::optional<PartitionSpec> partition;
  if (auto it = doc.find("partition"); it != doc.end()) {
    only_keys(*it, {"additional"}, "$.partition");
    PartitionSpec p;
    for (const auto& id : array(*it, "additional", "$.partition")) {
      if (!id.is_number_integer()) violation("$.partition.additional", "expected integers");
      p.additional_ids.insert(id.get<int>());
    }
    partition = std::move(p);
  }

  return ModelDocument{StructuralModel(dpn, std::move(nodes), std::move(elements), std::move(supports),
                                       std::move(loads), layout),
                       std::move(partition)};
}

void write_model_file(const std::string& path, const StructuralModel& model,
                      const std::optional<PartitionSpec>& partition) {
  // Serialize fully before touching the file so a failure leaves nothing behind.
  const std::string body = model_to_json(model, partition).dump(1) + "\n";
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::InvalidParameter, "cannot open '" + path + "' for writing");
  out << body;
  if (!out) throw Error(ErrorKind::InvalidParameter, "failed writing '" + path + "'");
}

ModelDocument read_model_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::InvalidParameter, "cannot open '" + path + "'");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::SchemaViolation, path + ": " + e.what());
  }
  return model_from_json(doc);
}

}  // namespace reanalysis
