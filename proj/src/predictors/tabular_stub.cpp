#include "semaquery/predictors/tabular_stub.hpp"

#include "semaquery/common/exception.hpp"
#include "semaquery/common/string_util.hpp"

namespace semaquery {

namespace {

constexpr int64_t kMicrosPerDay = 86400LL * 1000000LL;
//! 2000-01-01T00:00:00Z
constexpr int64_t kEpoch2000Micros = 946684800LL * 1000000LL;

} // namespace

void TabularStubPredictor::Load(const ModelEntry &model, const PredictConfig &config) {
	(void)config;
	if (model.type != ModelType::Tabular) {
		throw ConfigException("model " + model.name + " is not TABULAR; the tabular stub cannot serve it");
	}
}

Row TabularStubPredictor::PredictRow(const Row &features, const std::vector<ColumnBinding> &outputs) {
	std::vector<std::string> parts;
	for (auto &value : features) {
		parts.push_back(value.ToString());
	}
	auto h = string_util::Fnv1a(string_util::Join(parts, "\x1f"));
	Row result;
	for (size_t k = 0; k < outputs.size(); k++) {
		auto hk = k == 0 ? h : string_util::Fnv1a(outputs[k].name, h);
		switch (outputs[k].type) {
		case LogicalType::Integer:
			result.push_back(Value::Integer(static_cast<int64_t>(hk % 7)));
			break;
		case LogicalType::Double:
			result.push_back(Value::Double(static_cast<double>(hk % 1000) / 1000.0));
			break;
		case LogicalType::Boolean:
			result.push_back(Value::Boolean(hk % 2 == 1));
			break;
		case LogicalType::Datetime:
			result.push_back(
			    Value::Timestamp(Datetime {kEpoch2000Micros + static_cast<int64_t>(hk % 3650) * kMicrosPerDay}));
			break;
		default:
			result.push_back(Value::Varchar("class_" + std::to_string(hk % 7)));
			break;
		}
	}
	return result;
}

PredictResponse TabularStubPredictor::Predict(const PredictRequest &request) {
	auto &info = *request.info;
	PredictResponse response;
	std::vector<Row> records;
	for (auto &row : request.rows) {
		if (row.size() != info.inputs.size()) {
			throw BackendException("tabular model " + info.ModelName() + " expects " +
			                           std::to_string(info.inputs.size()) + " features, got " +
			                           std::to_string(row.size()),
			                       false);
		}
		records.push_back(PredictRow(row, info.outputs));
	}
	response.records = std::move(records);
	return response;
}

} // namespace semaquery
