#include "mocp/model_io.hpp"

#include "mocp/conditional_gaussian.hpp"
#include "mocp/knn_kde.hpp"
#include "mocp/toy_process.hpp"

#include <fstream>

namespace mocp {

using nlohmann::json;

namespace {

json matrix_to_json(const Matrix& m)
{
  json rows = json::array();
  for (Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Index c = 0; c < m.cols(); ++c)
      row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

json vector_to_json(const Vector& v)
{
  return json(std::vector<double>(v.data(), v.data() + v.size()));
}

Matrix matrix_from_json(const json& j, Index cols)
{
  if (!j.is_array())
    throw InvalidData("model json: expected a matrix");
  Matrix m(static_cast<Index>(j.size()), cols);
  for (Index r = 0; r < m.rows(); ++r) {
    const json& row = j[static_cast<std::size_t>(r)];
    if (!row.is_array() || static_cast<Index>(row.size()) != cols)
      throw InvalidData("model json: ragged matrix");
    for (Index c = 0; c < cols; ++c)
      m(r, c) = row[static_cast<std::size_t>(c)].get<double>();
  }
  return m;
}

Index width_of(const json& j)
{
  if (!j.is_array() || j.empty())
    return 0;
  return static_cast<Index>(j.front().size());
}

Vector vector_from_json(const json& j)
{
  const auto v = j.get<std::vector<double>>();
  return Eigen::Map<const Vector>(v.data(), static_cast<Index>(v.size()));
}

} // namespace

json model_to_json(const BasePredictor& model)
{
  json doc;
  doc["schema_version"] = kModelSchemaVersion;
  if (auto* cg = dynamic_cast<const ConditionalGaussian*>(&model)) {
    doc["type"] = "conditional_gaussian";
    doc["input_dim"] = cg->input_dim();
    doc["coef"] = matrix_to_json(cg->coef());
    doc["intercept"] = vector_to_json(cg->intercept());
    doc["chol"] = matrix_to_json(cg->chol());
  } else if (auto* kde = dynamic_cast<const KnnKde*>(&model)) {
    doc["type"] = "knn_kde";
    doc["k"] = kde->k();
    doc["sigma"] = kde->sigma();
    doc["input_dim"] = kde->input_dim();
    doc["train_x"] = matrix_to_json(kde->train_x());
    doc["train_y"] = matrix_to_json(kde->train_y());
  } else if (auto* oracle = dynamic_cast<const OracleToyModel*>(&model)) {
    doc["type"] = "oracle";
    doc["process"] = to_string(oracle->spec().id);
    doc["standardize"] = oracle->spec().standardize;
  } else {
    throw InvalidConfig("model of kind '" + model.kind() + "' cannot be serialized");
  }
  return doc;
}

ModelPtr model_from_json(const json& doc)
{
  try {
    const int version = doc.at("schema_version").get<int>();
    if (version != kModelSchemaVersion)
      throw InvalidData("model json: unsupported schema version " + std::to_string(version));
    const std::string type = doc.at("type").get<std::string>();
    if (type == "conditional_gaussian") {
      const Index p = doc.at("input_dim").get<Index>();
      const Vector b = vector_from_json(doc.at("intercept"));
      return std::make_shared<ConditionalGaussian>(
        matrix_from_json(doc.at("coef"), p), b, matrix_from_json(doc.at("chol"), b.size()));
    }
    if (type == "knn_kde") {
      const Index p = doc.at("input_dim").get<Index>();
      const json& ty = doc.at("train_y");
      return std::make_shared<KnnKde>(matrix_from_json(doc.at("train_x"), p),
                                      matrix_from_json(ty, width_of(ty)),
                                      doc.at("k").get<Index>(),
                                      doc.at("sigma").get<double>());
    }
    if (type == "oracle") {
      ToyProcessSpec spec;
      spec.id = parse_toy_process(doc.at("process").get<std::string>());
      spec.standardize = doc.value("standardize", true);
      return std::make_shared<OracleToyModel>(spec);
    }
    throw InvalidData("model json: unknown type '" + type + "'");
  } catch (const json::exception& e) {
    throw InvalidData(std::string("model json: ") + e.what());
  }
}

void save_model(const BasePredictor& model, const std::string& path)
{
  std::ofstream out(path);
  if (!out)
    throw InvalidConfig("cannot write model file " + path);
  out << model_to_json(model).dump(1) << '\n';
}

ModelPtr load_model(const std::string& path)
{
  std::ifstream in(path);
  if (!in)
    throw InvalidConfig("cannot read model file " + path);
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw InvalidData("model file " + path + ": " + e.what());
  }
  return model_from_json(doc);
}

} // namespace mocp
