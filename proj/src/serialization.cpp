#include "momentfit/serialization.hpp"

#include "momentfit/error.hpp"

#include <fstream>

namespace momentfit {

using nlohmann::json;

json descriptor_to_json(const FamilyDescriptor& d) {
    json j;
    j["family"] = to_string(d.kind);
    j["order"] = d.order;
    j["dim"] = d.dim;
    if (d.region)
        j["region"] = {{"lower", d.region->lower()}, {"upper", d.region->upper()}};
    else
        j["region"] = nullptr;
    if (d.kind == FamilyKind::product) {
        j["factors"] = json::array();
        for (const auto& f : d.factors) j["factors"].push_back(descriptor_to_json(f));
    }
    if (d.kind == FamilyKind::custom) {
        j["terms"] = d.terms;
        j["orthonormalize"] = d.orthonormalize;
    }
    return j;
}

FamilyDescriptor descriptor_from_json(const json& j) {
    try {
        FamilyDescriptor d{family_kind_from_string(j.at("family").get<std::string>()), j.at("order").get<int>(),
                           j.value("dim", std::size_t{1}), std::nullopt, {}, {}, false};
        if (j.contains("region") && !j["region"].is_null())
            d.region = Region(j["region"].at("lower").get<std::vector<double>>(),
                              j["region"].at("upper").get<std::vector<double>>());
        if (j.contains("factors"))
            for (const auto& f : j["factors"]) d.factors.push_back(descriptor_from_json(f));
        if (j.contains("terms")) d.terms = j["terms"].get<std::vector<std::string>>();
        d.orthonormalize = j.value("orthonormalize", false);
        return d;
    } catch (const json::exception& e) {
        throw InputError(std::string("malformed basis descriptor: ") + e.what());
    }
}

json model_to_json(const FittedDensity& density) {
    if (!density.family().serializable()) throw InputError("basis family cannot be stored in a model file");
    json j;
    j["basis"] = descriptor_to_json(density.family().descriptor());
    auto vec = [](const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); };
    if (density.is_complex())
        j["coefficients"] = {{"re", vec(density.coefficients())}, {"im", vec(density.coefficients_imag())}};
    else
        j["coefficients"] = vec(density.coefficients());
    if (const auto& t = density.transform()) {
        json rows = json::array();
        for (Eigen::Index r = 0; r < t->matrix.rows(); ++r) {
            Eigen::VectorXd row = t->matrix.row(r).transpose();
            rows.push_back(vec(row));
        }
        j["transform"] = {{"mean", vec(t->mean)}, {"matrix", rows}};
    } else {
        j["transform"] = nullptr;
    }
    j["weight_kind"] = to_string(density.kind());
    return j;
}

FittedDensity model_from_json(const json& j) {
    try {
        auto family = make_family(descriptor_from_json(j.at("basis")));
        auto vec = [](const json& a) {
            auto v = a.get<std::vector<double>>();
            return Eigen::VectorXd(Eigen::Map<Eigen::VectorXd>(v.data(), Eigen::Index(v.size())));
        };
        std::optional<AffineTransform> transform;
        if (j.contains("transform") && !j["transform"].is_null()) {
            const auto& t = j["transform"];
            Eigen::VectorXd mean = vec(t.at("mean"));
            const auto& rows = t.at("matrix");
            const auto d = mean.size();
            if (static_cast<Eigen::Index>(rows.size()) != d) throw InputError("transform matrix is not square");
            Eigen::MatrixXd m(d, d);
            for (Eigen::Index r = 0; r < d; ++r) {
                Eigen::VectorXd row = vec(rows[std::size_t(r)]);
                if (row.size() != d) throw InputError("transform matrix is not square");
                m.row(r) = row.transpose();
            }
            transform = AffineTransform{mean, m, std::abs(m.determinant())};
        }
        const std::string kind = j.value("weight_kind", "real");
        const auto& c = j.at("coefficients");
        if (kind == "complex") return FittedDensity(family, vec(c.at("re")), vec(c.at("im")), transform);
        if (kind != "real") throw InputError("unknown weight_kind '" + kind + "'");
        return FittedDensity(family, vec(c), transform);
    } catch (const json::exception& e) {
        throw InputError(std::string("malformed model: ") + e.what());
    }
}

void save_model(const std::filesystem::path& path, const FittedDensity& density, const json& config) {
    json j = model_to_json(density);
    if (!config.is_null()) j["config"] = config;
    std::ofstream out(path);
    if (!out) throw InputError("cannot write '" + path.string() + "'");
    out << j.dump(2) << '\n';
}

FittedDensity load_model(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open '" + path.string() + "'");
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw InputError("malformed model '" + path.string() + "': " + e.what());
    }
    return model_from_json(j);
}

}  // namespace momentfit
