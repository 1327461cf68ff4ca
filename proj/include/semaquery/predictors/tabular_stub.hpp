#pragma once

#include "semaquery/predictors/predictor.hpp"

namespace semaquery {

//! Deterministic stand-in for a trained tabular model. For each row the feature values are rendered with
//! Value::ToString, joined with '\x1f' and hashed with 64-bit FNV-1a (h). Output k uses h for k = 0 and
//! FNV-1a(output name, seed = h) otherwise, mapped by type:
//!   INTEGER  h mod 7
//!   DOUBLE   (h mod 1000) / 1000
//!   BOOLEAN  h mod 2 == 1
//!   VARCHAR  "class_" + (h mod 7)
//!   DATETIME 2000-01-01 plus (h mod 3650) days
class TabularStubPredictor : public Predictor {
public:
	std::string Name() const override {
		return "tabular-stub";
	}
	void Load(const ModelEntry &model, const PredictConfig &config) override;
	PredictResponse Predict(const PredictRequest &request) override;

	static Row PredictRow(const Row &features, const std::vector<ColumnBinding> &outputs);
};

} // namespace semaquery
