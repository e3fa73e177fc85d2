#pragma once

#include <fstream>
#include <memory>
#include <string>

#include <nlohmann/json.hpp>

#include "xcsge/ensemble.hpp"
#include "xcsge/learners.hpp"

namespace xcsge {

inline constexpr int kModelFormatVersion = 1;

namespace detail {

using nlohmann::json;

inline json matrix_to_json(const Matrix& m) {
    json rows = json::array();
    for (Index i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(std::move(row));
    }
    return json{{"rows", m.rows()}, {"cols", m.cols()}, {"data", std::move(rows)}};
}

inline Matrix matrix_from_json(const json& j) {
    Matrix m(j.at("rows").get<Index>(), j.at("cols").get<Index>());
    const auto& data = j.at("data");
    for (Index i = 0; i < m.rows(); ++i)
        for (Index c = 0; c < m.cols(); ++c)
            m(i, c) = data.at(static_cast<std::size_t>(i)).at(static_cast<std::size_t>(c))
                          .get<double>();
    return m;
}

inline json vector_to_json(const Vector& v) {
    json a = json::array();
    for (Index i = 0; i < v.size(); ++i) a.push_back(v(i));
    return a;
}

inline Vector vector_from_json(const json& j) {
    Vector v(static_cast<Index>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Index>(i)) = j[i].get<double>();
    return v;
}

inline json tensor_to_json(const Tensor3& t) {
    return json{{"d0", t.dim0()}, {"d1", t.dim1()}, {"d2", t.dim2()}, {"data", t.raw()}};
}

inline Tensor3 tensor_from_json(const json& j) {
    Tensor3 t(j.at("d0").get<Index>(), j.at("d1").get<Index>(), j.at("d2").get<Index>());
    t.raw() = j.at("data").get<std::vector<double>>();
    if (t.raw().size() != static_cast<std::size_t>(t.dim0() * t.dim1() * t.dim2()))
        throw SerializationError("tensor payload size mismatch");
    return t;
}

inline json member_to_json(const EnsembleMember& member) {
    if (auto* lagged = dynamic_cast<const LaggedMember*>(&member)) {
        return json{{"type", "lagged"},
                    {"lag", lagged->lag()},
                    {"base", member_to_json(*lagged->base())}};
    }
    if (auto* ridge = dynamic_cast<const RidgeMember*>(&member)) {
        json models = json::array();
        for (const auto& m : ridge->models())
            models.push_back(json{{"coefficients", matrix_to_json(m.coefficients)},
                                  {"intercept", vector_to_json(m.intercept)},
                                  {"lambda", m.lambda}});
        return json{{"type", "ridge"}, {"id", ridge->id()}, {"models", std::move(models)}};
    }
    if (auto* knn = dynamic_cast<const KnnMember*>(&member)) {
        return json{{"type", "knn"},
                    {"id", knn->id()},
                    {"k", knn->k()},
                    {"mode", knn->mode() == KnnMode::Regress ? "regress" : "classify"},
                    {"features", matrix_to_json(knn->reference_features())},
                    {"targets", tensor_to_json(knn->reference_targets())}};
    }
    if (auto* pers = dynamic_cast<const PersistenceMember*>(&member)) {
        return json{{"type", "persistence"},
                    {"id", pers->id()},
                    {"feature_column", pers->feature_column()},
                    {"target_dims", pers->target_dims()}};
    }
    if (auto* pre = dynamic_cast<const PrecomputedMember*>(&member)) {
        json entries = json::array();
        for (const auto& [key, value] : pre->table())
            entries.push_back(json{{"sample_id", key.first},
                                   {"leadtime", key.second},
                                   {"p", vector_to_json(value)}});
        return json{{"type", "precomputed"},
                    {"id", pre->id()},
                    {"target_dims", pre->target_dims()},
                    {"table", std::move(entries)}};
    }
    throw SerializationError("cannot serialize member '" + member.id() +
                             "': unsupported member type");
}

inline MemberPtr member_from_json(const json& j) {
    const std::string type = j.at("type").get<std::string>();
    if (type == "lagged")
        return std::make_shared<LaggedMember>(member_from_json(j.at("base")),
                                              j.at("lag").get<int>());
    if (type == "ridge") {
        std::vector<RidgeModel> models;
        for (const auto& m : j.at("models")) {
            RidgeModel r;
            r.coefficients = matrix_from_json(m.at("coefficients"));
            r.intercept = vector_from_json(m.at("intercept"));
            r.lambda = m.at("lambda").get<double>();
            models.push_back(std::move(r));
        }
        return std::make_shared<RidgeMember>(j.at("id").get<std::string>(), std::move(models));
    }
    if (type == "knn")
        return std::make_shared<KnnMember>(
            j.at("id").get<std::string>(), matrix_from_json(j.at("features")),
            tensor_from_json(j.at("targets")), j.at("k").get<int>(),
            j.at("mode").get<std::string>() == "classify" ? KnnMode::Classify
                                                          : KnnMode::Regress);
    if (type == "persistence")
        return std::make_shared<PersistenceMember>(j.at("id").get<std::string>(),
                                                   j.at("feature_column").get<Index>(),
                                                   j.at("target_dims").get<Index>());
    if (type == "precomputed") {
        PrecomputedMember::Table table;
        for (const auto& e : j.at("table"))
            table[{e.at("sample_id").get<std::string>(), e.at("leadtime").get<Index>()}] =
                vector_from_json(e.at("p"));
        return std::make_shared<PrecomputedMember>(j.at("id").get<std::string>(),
                                                   std::move(table),
                                                   j.at("target_dims").get<Index>());
    }
    throw SerializationError("unknown member type: " + type);
}

inline json local_model_to_json(const LocalErrorModel& model) {
    if (auto* knn = dynamic_cast<const KnnErrorModel*>(&model)) {
        return json{{"type", "knn"},
                    {"k", knn->k()},
                    {"features", matrix_to_json(knn->reference_features())},
                    {"errors", matrix_to_json(knn->reference_errors())}};
    }
    throw SerializationError("cannot serialize local model of kind '" + model.kind() + "'");
}

inline std::shared_ptr<LocalErrorModel> local_model_from_json(const json& j) {
    if (j.at("type").get<std::string>() != "knn")
        throw SerializationError("unknown local model type");
    return std::make_shared<KnnErrorModel>(matrix_from_json(j.at("features")),
                                           matrix_from_json(j.at("errors")),
                                           j.at("k").get<int>());
}

} // namespace detail

inline nlohmann::json model_to_json(const XcsgeModel& model) {
    using nlohmann::json;
    json j;
    j["format_version"] = kModelFormatVersion;
    j["eta"] = {{"global", model.eta().global.value},
                {"local", model.eta().local.value},
                {"time", model.eta().time.value}};
    j["global_scores"] = detail::matrix_to_json(model.global_scores());
    j["profile"] = {{"values", detail::tensor_to_json(model.profile().values)},
                    {"relative", detail::tensor_to_json(model.profile().relative)}};
    j["members"] = nlohmann::json::array();
    for (const auto& m : model.members()) j["members"].push_back(detail::member_to_json(*m));
    j["local_models"] = nlohmann::json::array();
    for (const auto& m : model.local_models())
        j["local_models"].push_back(detail::local_model_to_json(*m));
    j["mask"] = model.mask();
    j["config"] = {{"score", model.config().score.name()},
                   {"epsilon", model.config().epsilon},
                   {"classification", model.config().classification},
                   {"renormalize_proba", model.config().renormalize_proba}};
    return j;
}

inline XcsgeModel model_from_json(const nlohmann::json& j) {
    try {
        if (j.at("format_version").get<int>() != kModelFormatVersion)
            throw SerializationError("unsupported model format version");
        XcsgeConfig config;
        config.score = ScoreFunction::by_name(j.at("config").at("score").get<std::string>());
        config.epsilon = j.at("config").at("epsilon").get<double>();
        config.classification = j.at("config").at("classification").get<bool>();
        config.renormalize_proba = j.at("config").at("renormalize_proba").get<bool>();

        EtaTriple eta{Eta(j.at("eta").at("global").get<double>()),
                      Eta(j.at("eta").at("local").get<double>()),
                      Eta(j.at("eta").at("time").get<double>())};

        std::vector<MemberPtr> members;
        for (const auto& m : j.at("members")) members.push_back(detail::member_from_json(m));
        std::vector<std::shared_ptr<LocalErrorModel>> local_models;
        for (const auto& m : j.at("local_models"))
            local_models.push_back(detail::local_model_from_json(m));

        LeadtimeErrorProfile profile;
        profile.values = detail::tensor_from_json(j.at("profile").at("values"));
        profile.relative = detail::tensor_from_json(j.at("profile").at("relative"));

        XcsgeModel model(std::move(members), eta,
                         detail::matrix_from_json(j.at("global_scores")),
                         std::move(local_models), std::move(profile), std::move(config));
        model.set_member_mask(j.at("mask").get<std::vector<bool>>());
        return model;
    } catch (const nlohmann::json::exception& e) {
        throw SerializationError(std::string("model parse: ") + e.what());
    }
}

inline void save_model(const XcsgeModel& model, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw SerializationError("cannot write model file: " + path);
    out << model_to_json(model).dump() << "\n";
}

inline XcsgeModel load_model(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw SerializationError("cannot open model file: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw SerializationError(std::string("model parse: ") + e.what());
    }
    return model_from_json(j);
}

} // namespace xcsge
