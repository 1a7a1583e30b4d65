#include <algorithm>
#include <fstream>

#include "sympde/error.hpp"
#include "sympde/io.hpp"

namespace sympde {
namespace {

template <class T>
T field(const Json& j, const char* key, const std::string& where)
{
    if (!j.contains(key))
        throw ConfigError(where + ": missing field '" + key + "'");
    try
    {
        return j.at(key).get<T>();
    }
    catch (const nlohmann::json::exception&)
    {
        throw ConfigError(where + ": field '" + key + "' has the wrong type");
    }
}

std::pair<double, double> interval(const Json& j, const std::string& where)
{
    if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
        throw ConfigError(where + ": expected [lo, hi]");
    return {j[0].get<double>(), j[1].get<double>()};
}

std::string op_key(OpId op) { return std::string(op_name(op)); }

OpId op_from_key(const std::string& name)
{
    for (OpId op : {OpId::Id, OpId::Sin, OpId::Exp, OpId::Sqrt, OpId::Abs, OpId::Add,
                    OpId::Mul, OpId::Div})
    {
        if (name == op_name(op))
            return op;
    }
    throw ConfigError("unknown operator '" + name + "'");
}

}  // namespace

Json problem_to_json(const ProblemConfig& config)
{
    Json j;
    j["name"] = config.name;
    j["variables"] = config.variables;
    j["residual"] = config.residual;
    Json domain = Json::object();
    for (std::size_t i = 0; i < config.variables.size() && i < config.domain.size(); ++i)
        domain[config.variables[i]] = {config.domain[i].first, config.domain[i].second};
    j["domain"] = domain;
    Json cons = Json::array();
    for (const ConstraintConfig& c : config.constraints)
    {
        Json cj;
        Json fix = Json::object();
        for (const auto& [k, v] : c.fix)
            fix[k] = v;
        cj["fix"] = fix;
        cj["kind"] = c.kind;
        cj["target"] = c.target;
        cj["n"] = c.n;
        if (!c.range.empty())
        {
            Json range = Json::object();
            for (const auto& [k, v] : c.range)
                range[k] = {v.first, v.second};
            cj["range"] = range;
        }
        if (!c.open_lower.empty())
            cj["open_lower"] = c.open_lower;
        cons.push_back(cj);
    }
    j["constraints"] = cons;
    j["lambda"] = config.lambda;
    j["epsilon"] = config.epsilon;
    if (config.depth)
        j["depth"] = *config.depth;
    return j;
}

ProblemConfig problem_from_json(const Json& j)
{
    if (!j.is_object())
        throw ConfigError("problem config must be a JSON object");
    ProblemConfig cfg;
    cfg.name = j.contains("name") ? field<std::string>(j, "name", "problem") : "custom";
    cfg.variables = field<std::vector<std::string>>(j, "variables", "problem");
    cfg.residual = field<std::string>(j, "residual", "problem");

    const Json& domain = j.contains("domain") ? j.at("domain") : Json();
    if (!domain.is_object())
        throw ConfigError("problem: 'domain' must be an object");
    for (const std::string& v : cfg.variables)
    {
        if (!domain.contains(v))
            throw ConfigError("problem: domain has no interval for '" + v + "'");
        cfg.domain.push_back(interval(domain.at(v), "domain." + v));
    }
    for (const auto& [k, _] : domain.items())
    {
        if (std::find(cfg.variables.begin(), cfg.variables.end(), k) == cfg.variables.end())
            throw ConfigError("problem: domain names unknown variable '" + k + "'");
    }

    if (j.contains("constraints"))
    {
        const Json& cons = j.at("constraints");
        if (!cons.is_array())
            throw ConfigError("problem: 'constraints' must be an array");
        for (std::size_t i = 0; i < cons.size(); ++i)
        {
            const Json& cj = cons[i];
            const std::string where = "constraints[" + std::to_string(i) + "]";
            if (!cj.is_object())
                throw ConfigError(where + ": must be an object");
            ConstraintConfig c;
            const Json& fix = cj.contains("fix") ? cj.at("fix") : Json();
            if (!fix.is_object())
                throw ConfigError(where + ": 'fix' must be an object");
            for (const auto& [k, v] : fix.items())
            {
                if (!v.is_number())
                    throw ConfigError(where + ": fix." + k + " must be a number");
                c.fix[k] = v.get<double>();
            }
            c.kind = cj.contains("kind") ? field<std::string>(cj, "kind", where) : "value";
            c.target = field<std::string>(cj, "target", where);
            if (cj.contains("n"))
            {
                const Json& n = cj.at("n");
                if (!n.is_number_integer() || n.get<long long>() < 1)
                    throw ConfigError(where + ": 'n' must be a positive integer");
                c.n = n.get<std::size_t>();
            }
            if (cj.contains("range"))
            {
                const Json& range = cj.at("range");
                if (!range.is_object())
                    throw ConfigError(where + ": 'range' must be an object");
                for (const auto& [k, v] : range.items())
                    c.range[k] = interval(v, where + ".range." + k);
            }
            if (cj.contains("open_lower"))
                c.open_lower = field<std::vector<std::string>>(cj, "open_lower", where);
            cfg.constraints.push_back(std::move(c));
        }
    }
    if (j.contains("lambda"))
        cfg.lambda = field<double>(j, "lambda", "problem");
    if (j.contains("epsilon"))
        cfg.epsilon = field<double>(j, "epsilon", "problem");
    if (j.contains("depth"))
        cfg.depth = field<int>(j, "depth", "problem");
    return cfg;
}

ProblemConfig load_problem(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw ConfigError("cannot open '" + path + "'");
    Json j;
    try
    {
        j = Json::parse(in);
    }
    catch (const nlohmann::json::parse_error& e)
    {
        throw ConfigError("'" + path + "': " + e.what());
    }
    return problem_from_json(j);
}

Json model_to_json(const MsflModel& model)
{
    Json j;
    j["m"] = model.depth();
    j["d"] = model.dims();
    Json lib;
    Json unary = Json::array();
    for (OpId op : model.library().unary)
        unary.push_back(op_key(op));
    Json binary = Json::array();
    for (OpId op : model.library().binary)
        binary.push_back(op_key(op));
    lib["unary"] = unary;
    lib["binary"] = binary;
    j["lib"] = lib;
    j["gate_mode"] = model.gate_mode() == GateMode::Soft ? "soft" : "discrete";
    j["parameters"] = std::vector<double>(model.parameters().begin(), model.parameters().end());
    return j;
}

MsflModel model_from_json(const Json& j)
{
    if (!j.is_object())
        throw ConfigError("model must be a JSON object");
    OperatorLibrary lib;
    const Json& lj = j.contains("lib") ? j.at("lib") : Json();
    if (!lj.is_object())
        throw ConfigError("model: 'lib' must be an object");
    for (const auto& name : field<std::vector<std::string>>(lj, "unary", "model.lib"))
        lib.unary.push_back(op_from_key(name));
    for (const auto& name : field<std::vector<std::string>>(lj, "binary", "model.lib"))
        lib.binary.push_back(op_from_key(name));
    try
    {
        lib.validate();
    }
    catch (const std::invalid_argument& e)
    {
        throw ConfigError(std::string("model.lib: ") + e.what());
    }
    MsflModel model(field<int>(j, "m", "model"), field<int>(j, "d", "model"), lib);
    const auto mode = field<std::string>(j, "gate_mode", "model");
    if (mode != "soft" && mode != "discrete")
        throw ConfigError("model: gate_mode must be 'soft' or 'discrete'");
    model.set_gate_mode(mode == "soft" ? GateMode::Soft : GateMode::Discrete);
    const auto params = field<std::vector<double>>(j, "parameters", "model");
    if (params.size() != model.parameter_count())
        throw ConfigError("model: expected " + std::to_string(model.parameter_count())
                          + " parameters, got " + std::to_string(params.size()));
    model.set_parameters(params);
    return model;
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

}  // namespace sympde
