// Copyright 2026 The mmhash Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <unordered_set>

#include "mmhash/embedding.h"
#include "mmhash/encode.h"
#include "mmhash/errors.h"
#include "mmhash/evaluator.h"
#include "mmhash/hamming.h"
#include "mmhash/model.h"
#include "mmhash/trainer.h"

namespace py = pybind11;

namespace mmhash::python {
namespace {

using Int8Rows = py::array_t<int8_t, py::array::c_style | py::array::forcecast>;

std::vector<std::vector<int8_t>> SignRows(const Int8Rows& signs) {
  if (signs.ndim() != 2) throw ArgumentError("signs must be a 2-D array");
  const auto view = signs.unchecked<2>();
  std::vector<std::vector<int8_t>> rows(view.shape(0));
  for (py::ssize_t r = 0; r < view.shape(0); ++r) {
    rows[r].resize(view.shape(1));
    for (py::ssize_t c = 0; c < view.shape(1); ++c) rows[r][c] = view(r, c);
  }
  return rows;
}

std::vector<uint64_t> QueryWords(const BinaryCodeMatrix& index,
                                 const Int8Rows& signs) {
  std::vector<int8_t> row(signs.data(), signs.data() + signs.size());
  const auto bits = static_cast<uint32_t>(row.size());
  if (bits != index.bits) {
    throw ShapeError("query code length differs from the index");
  }
  return PackCodes({std::move(row)}, {0}, bits).words;
}

py::list ToPython(const SearchResult& result) {
  py::list out;
  for (const Neighbor& n : result) out.append(py::make_tuple(n.id, n.distance));
  return out;
}

py::array_t<float> FeatureArray(const EmbeddingSet& set, size_t modality) {
  const size_t dim = set.modality_dims.at(modality);
  py::array_t<float> out({set.sample_count(), dim});
  std::copy(set.features[modality].begin(), set.features[modality].end(),
            out.mutable_data());
  return out;
}

py::array_t<uint8_t> LabelArray(const EmbeddingSet& set) {
  py::array_t<uint8_t> out(
      {set.sample_count(), static_cast<size_t>(set.category_count)});
  std::copy(set.labels.begin(), set.labels.end(), out.mutable_data());
  return out;
}

EmbeddingSet MakeSet(const std::vector<py::array_t<float, py::array::c_style |
                                                              py::array::forcecast>>&
                         features,
                     const py::array_t<uint8_t, py::array::c_style |
                                                    py::array::forcecast>& labels,
                     const std::vector<uint64_t>& ids) {
  std::vector<uint32_t> dims;
  for (const auto& f : features) {
    if (f.ndim() != 2) throw ArgumentError("features must be 2-D arrays");
    dims.push_back(static_cast<uint32_t>(f.shape(1)));
  }
  if (labels.ndim() != 2) throw ArgumentError("labels must be a 2-D array");
  EmbeddingSet set =
      MakeEmptySet(std::move(dims), static_cast<uint32_t>(labels.shape(1)));
  for (size_t m = 0; m < features.size(); ++m) {
    set.features[m].assign(features[m].data(),
                           features[m].data() + features[m].size());
  }
  set.labels.assign(labels.data(), labels.data() + labels.size());
  set.ids = ids;
  ValidateEmbeddingSet(set);
  return set;
}

}  // namespace

void DefineModule(py::module_& m) {
  py::register_exception<FormatError>(m, "FormatError", PyExc_ValueError);
  py::register_exception<NumericError>(m, "NumericError", PyExc_ArithmeticError);
  py::register_exception<EvaluationError>(m, "EvaluationError",
                                          PyExc_RuntimeError);

  py::class_<EmbeddingSet>(m, "EmbeddingSet")
      .def(py::init(&MakeSet), py::arg("features"), py::arg("labels"),
           py::arg("ids"))
      .def_static("read", &ReadEmbeddingFile, py::arg("path"))
      .def("write", [](const EmbeddingSet& s, const std::string& path) {
        WriteEmbeddingFile(s, path);
      })
      .def_property_readonly("sample_count", &EmbeddingSet::sample_count)
      .def_readonly("modality_dims", &EmbeddingSet::modality_dims)
      .def_readonly("category_count", &EmbeddingSet::category_count)
      .def_readonly("ids", &EmbeddingSet::ids)
      .def("features", &FeatureArray, py::arg("modality"))
      .def_property_readonly("labels", &LabelArray)
      .def("concat", &ConcatModalities, py::arg("index"),
           py::arg("normalize") = false)
      .def("__eq__", [](const EmbeddingSet& a, const EmbeddingSet& b) {
        return a == b;
      });

  py::class_<DatasetSplit>(m, "DatasetSplit")
      .def_readonly("train", &DatasetSplit::train)
      .def_readonly("retrieval", &DatasetSplit::retrieval)
      .def_readonly("query", &DatasetSplit::query)
      .def_readonly("category_count", &DatasetSplit::category_count)
      .def("write", &WriteSplit, py::arg("prefix"))
      .def_static("load", &LoadSplit, py::arg("manifest_path"));

  m.def(
      "generate_synthetic",
      [](uint32_t classes, uint32_t per_class, std::vector<uint32_t> dims,
         double noise, uint64_t seed) {
        return GenerateSynthetic({classes, per_class, std::move(dims), noise,
                                  seed});
      },
      py::arg("class_count"), py::arg("per_class"),
      py::arg("modality_dims") = std::vector<uint32_t>{512, 512},
      py::arg("noise_sigma") = 0.05, py::arg("seed") = 0);

  py::class_<ModelParams>(m, "Model")
      .def_static("init", &InitParams, py::arg("input_dim"), py::arg("bits"),
                  py::arg("categories"), py::arg("seed"),
                  py::arg("normalize_inputs") = true)
      .def_static("read", &ReadCheckpoint, py::arg("path"))
      .def("write", [](const ModelParams& p, const std::string& path) {
        WriteCheckpoint(p, path);
      })
      .def_property_readonly("input_dim", &ModelParams::input_dim)
      .def_property_readonly("bits", &ModelParams::bits)
      .def_property_readonly("categories", &ModelParams::categories)
      .def_readonly("seed", &ModelParams::seed)
      .def_readonly("normalize_inputs", &ModelParams::normalize_inputs)
      .def_property_readonly(
          "gate_weight", [](const ModelParams& p) { return p.gating.weight; })
      .def_property_readonly(
          "gate_bias", [](const ModelParams& p) { return p.gating.bias; })
      .def_property_readonly(
          "hash_weight", [](const ModelParams& p) { return p.hash.weight; })
      .def_property_readonly(
          "hash_bias", [](const ModelParams& p) { return p.hash.bias; })
      .def("encode", &EncodeSet, py::arg("set"))
      .def("forward",
           [](const ModelParams& p, const Vector& x) {
             const ForwardTrace t = Forward(p, x);
             return py::dict(py::arg("gate") = t.gate,
                             py::arg("x_fusion") = t.x_fusion,
                             py::arg("pre_tanh") = t.pre_tanh,
                             py::arg("relaxed_code") = t.relaxed_code);
           })
      .def("__eq__", [](const ModelParams& a, const ModelParams& b) {
        return a == b;
      });

  m.def(
      "gate_forward",
      [](const Matrix& weight, const Vector& bias, const Vector& x) {
        const GateOutput out = GateForward({weight, bias}, x);
        return py::make_tuple(out.gate, out.fused);
      },
      py::arg("weight"), py::arg("bias"), py::arg("x"));
  m.def(
      "hash_forward",
      [](const Matrix& weight, const Vector& bias, const Vector& fused) {
        const HashOutput out = HashForward({weight, bias}, fused);
        return py::make_tuple(out.pre_tanh, out.relaxed);
      },
      py::arg("weight"), py::arg("bias"), py::arg("x_fusion"));
  m.def(
      "binarize",
      [](const Vector& values) {
        const auto bits = Binarize(values);
        py::array_t<uint8_t> out(bits.size());
        std::copy(bits.begin(), bits.end(), out.mutable_data());
        return out;
      },
      py::arg("values"));

  py::class_<BinaryCodeMatrix>(m, "CodeMatrix")
      .def_static(
          "from_signs",
          [](const Int8Rows& signs, std::vector<uint64_t> ids) {
            const auto rows = SignRows(signs);
            return PackCodes(rows, std::move(ids),
                             static_cast<uint32_t>(signs.shape(1)));
          },
          py::arg("signs"), py::arg("ids"))
      .def_static("read", &ReadCodeFile, py::arg("path"))
      .def("write", [](const BinaryCodeMatrix& c, const std::string& path) {
        WriteCodeFile(c, path);
      })
      .def_readonly("bits", &BinaryCodeMatrix::bits)
      .def_readonly("ids", &BinaryCodeMatrix::ids)
      .def_readonly("words", &BinaryCodeMatrix::words)
      .def_property_readonly("count", &BinaryCodeMatrix::count)
      .def("unpack",
           [](const BinaryCodeMatrix& c, size_t i) {
             return UnpackCode(c.Code(i));
           })
      .def("distance",
           [](const BinaryCodeMatrix& c, size_t i, size_t j) {
             return HammingDistance(c.Code(i), c.Code(j));
           })
      .def("__eq__", [](const BinaryCodeMatrix& a, const BinaryCodeMatrix& b) {
        return a == b;
      });

  m.def(
      "search_topk",
      [](const BinaryCodeMatrix& index, const Int8Rows& query, size_t topk) {
        const auto words = QueryWords(index, query);
        return ToPython(SearchTopK(index, CodeRef{words, index.bits}, topk));
      },
      py::arg("index"), py::arg("query_signs"), py::arg("topk"));
  m.def(
      "rank_all",
      [](const BinaryCodeMatrix& index, const BinaryCodeMatrix& queries) {
        py::list out;
        for (const auto& r : RankAll(index, queries)) out.append(ToPython(r));
        return out;
      },
      py::arg("index"), py::arg("queries"));

  m.def(
      "average_precision",
      [](const std::vector<uint64_t>& ranking,
         const std::vector<uint64_t>& relevant) {
        return AveragePrecision(ranking, std::unordered_set<uint64_t>(
                                             relevant.begin(), relevant.end()));
      },
      py::arg("ranking"), py::arg("relevant"));
  m.def(
      "mean_average_precision",
      [](const EmbeddingSet& query, const EmbeddingSet& retrieval,
         const BinaryCodeMatrix& query_codes,
         const BinaryCodeMatrix& retrieval_codes) {
        const MapReport r =
            MeanAveragePrecision(query, retrieval, query_codes, retrieval_codes);
        return py::dict(py::arg("bits") = r.bits, py::arg("map") = r.map,
                        py::arg("evaluated_queries") = r.evaluated_queries,
                        py::arg("excluded_queries") = r.excluded_queries,
                        py::arg("mean_relevant") = r.mean_relevant);
      },
      py::arg("query"), py::arg("retrieval"), py::arg("query_codes"),
      py::arg("retrieval_codes"));

  m.def(
      "train",
      [](const DatasetSplit& split, size_t bits, int epochs, size_t batch_size,
         double learning_rate, double lambda_quant, bool normalize_inputs,
         uint64_t seed, const std::string& optimizer, bool allow_any_bits) {
        TrainConfig config;
        config.bits = bits;
        config.allow_any_bits = allow_any_bits;
        config.epochs = epochs;
        config.batch_size = batch_size;
        config.learning_rate = learning_rate;
        config.lambda_quant = lambda_quant;
        config.normalize_inputs = normalize_inputs;
        config.seed = seed;
        if (optimizer == "sgd") {
          config.optimizer = OptimizerKind::kSgd;
        } else if (optimizer != "adam") {
          throw ArgumentError("optimizer must be 'adam' or 'sgd'");
        }
        TrainResult result;
        {
          py::gil_scoped_release release;
          result = Train(split, config);
        }
        py::list log;
        for (const EpochLog& e : result.log) {
          log.append(py::make_tuple(e.epoch, e.terms.classification,
                                    e.terms.quantization, e.terms.total));
        }
        return py::make_tuple(std::move(result.params), log);
      },
      py::arg("split"), py::arg("bits") = 16, py::arg("epochs") = 30,
      py::arg("batch_size") = 32, py::arg("learning_rate") = 1e-3,
      py::arg("lambda_quant") = 0.1, py::arg("normalize_inputs") = true,
      py::arg("seed") = 0, py::arg("optimizer") = "adam",
      py::arg("allow_any_bits") = false);

  m.def("finite_diff_check", &FiniteDiffCheck, py::arg("input_dim"),
        py::arg("bits"), py::arg("categories"), py::arg("seed"),
        py::arg("constant_loss") = false);
}

PYBIND11_MODULE(_core, m) {  // NOLINT
  m.doc() = "Gated multi-modal fusion hashing";
  DefineModule(m);
}

}  // namespace mmhash::python
