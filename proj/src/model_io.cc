/*
 * Copyright 2026 The tsxai Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "tsxai/errors.h"
#include "tsxai/model.h"

namespace tsxai::tsmodel {
namespace {

using nlohmann::json;

std::vector<double> ReadNumbers(const json& layer, const char* key,
                                std::size_t index) {
  if (!layer.contains(key)) return {};
  const json& arr = layer.at(key);
  if (!arr.is_array()) {
    throw ParseError("layer " + std::to_string(index) + ": '" + key +
                     "' must be an array");
  }
  std::vector<double> out;
  out.reserve(arr.size());
  for (const json& v : arr) {
    if (!v.is_number()) {
      throw ParseError("layer " + std::to_string(index) + ": '" + key +
                       "' holds a non-number");
    }
    out.push_back(v.get<double>());
  }
  return out;
}

int ReadInt(const json& layer, const char* key, std::size_t index) {
  if (!layer.contains(key) || !layer.at(key).is_number_integer()) {
    throw ParseError("layer " + std::to_string(index) + ": missing integer '" +
                     key + "'");
  }
  return layer.at(key).get<int>();
}

void AppendNumbers(std::string* out, const std::vector<double>& values) {
  out->push_back('[');
  char buf[40];
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i > 0) out->push_back(',');
    std::snprintf(buf, sizeof(buf), "%.17g", values[i]);
    out->append(buf);
  }
  out->push_back(']');
}

}  // namespace

json ModelToJson(const Model& model) {
  json doc;
  doc["input_shape"] = {model.input_shape().channels,
                        model.input_shape().length};
  json layers = json::array();
  for (const LayerSpec& spec : model.layers()) {
    json layer;
    layer["kind"] = ToString(spec.kind);
    if (spec.kind != LayerKind::kFlatten) {
      layer["in"] = spec.in;
      layer["out"] = spec.out;
      if (spec.kind == LayerKind::kConv1D) {
        layer["k"] = spec.kernel;
        layer["dilation"] = spec.dilation;
      }
      layer["activation"] = ToString(spec.activation);
      layer["weights"] = spec.weights;
      layer["biases"] = spec.biases;
    }
    layers.push_back(std::move(layer));
  }
  doc["layers"] = std::move(layers);
  doc["metadata"] = model.metadata();
  return doc;
}

Model ModelFromJson(const json& doc) {
  if (!doc.is_object()) throw ParseError("model document must be an object");
  if (!doc.contains("input_shape") || !doc["input_shape"].is_array() ||
      doc["input_shape"].size() != 2) {
    throw ParseError("model needs \"input_shape\": [F, T]");
  }
  const Shape input{doc["input_shape"][0].get<std::size_t>(),
                    doc["input_shape"][1].get<std::size_t>()};
  if (!doc.contains("layers") || !doc["layers"].is_array()) {
    throw ParseError("model needs a \"layers\" array");
  }
  std::vector<LayerSpec> layers;
  const json& arr = doc["layers"];
  for (std::size_t i = 0; i < arr.size(); ++i) {
    const json& l = arr[i];
    if (!l.contains("kind") || !l["kind"].is_string()) {
      throw ParseError("layer " + std::to_string(i) + ": missing \"kind\"");
    }
    LayerSpec spec;
    spec.kind = ParseLayerKind(l["kind"].get<std::string>());
    if (spec.kind != LayerKind::kFlatten) {
      spec.in = ReadInt(l, "in", i);
      spec.out = ReadInt(l, "out", i);
      if (spec.kind == LayerKind::kConv1D) {
        spec.kernel = ReadInt(l, "k", i);
        spec.dilation = l.contains("dilation") ? ReadInt(l, "dilation", i) : 1;
      }
      spec.activation = ParseActivation(l.value("activation", "linear"));
      spec.weights = ReadNumbers(l, "weights", i);
      spec.biases = ReadNumbers(l, "biases", i);
    }
    layers.push_back(std::move(spec));
  }
  return Model(input, std::move(layers),
               doc.value("metadata", json::object()));
}

std::string SerializeModel(const Model& model) {
  std::string out = "{\n  \"input_shape\": [";
  out += std::to_string(model.input_shape().channels) + ", " +
         std::to_string(model.input_shape().length) + "],\n  \"layers\": [";
  for (std::size_t i = 0; i < model.layer_count(); ++i) {
    const LayerSpec& spec = model.layer(i);
    out += i == 0 ? "\n    {" : ",\n    {";
    out += "\"kind\": \"" + ToString(spec.kind) + "\"";
    if (spec.kind != LayerKind::kFlatten) {
      out += ", \"in\": " + std::to_string(spec.in);
      out += ", \"out\": " + std::to_string(spec.out);
      if (spec.kind == LayerKind::kConv1D) {
        out += ", \"k\": " + std::to_string(spec.kernel);
        out += ", \"dilation\": " + std::to_string(spec.dilation);
      }
      out += ", \"activation\": \"" + ToString(spec.activation) + "\"";
      out += ", \"weights\": ";
      AppendNumbers(&out, spec.weights);
      out += ", \"biases\": ";
      AppendNumbers(&out, spec.biases);
    }
    out += "}";
  }
  out += "\n  ],\n  \"metadata\": " + model.metadata().dump() + "\n}\n";
  return out;
}

Model ParseModel(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw ParseError(std::string("model JSON: ") + e.what());
  }
  try {
    return ModelFromJson(doc);
  } catch (const json::exception& e) {
    throw ParseError(std::string("model JSON: ") + e.what());
  }
}

void SaveModel(const Model& model, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path);
  out << SerializeModel(model);
  if (!out) throw Error("failed writing " + path);
}

Model LoadModel(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  Model model = ParseModel(buffer.str());
  model.RequireRegressionHead();
  return model;
}

}  // namespace tsxai::tsmodel
