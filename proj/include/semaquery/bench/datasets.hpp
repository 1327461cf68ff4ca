#pragma once

#include "semaquery/core/table.hpp"

#include <cstdint>
#include <string>

namespace semaquery {

//! Movie(movie_id, title, plot) with PRIMARY KEY movie_id and Review(review_id, movie_id, review) with
//! FOREIGN KEY movie_id REFERENCES Movie. Exactly `target_reviews` reviews belong to the movie titled
//! `target_title`; the rest are spread over the other movies. Review texts are distinct and contain one of the
//! words awful, great, boring, moving, fine.
struct ReviewDatasetSpec {
	size_t movies = 50;
	size_t reviews = 946;
	size_t target_reviews = 38;
	std::string target_title = "Titanic";
	uint64_t seed = 7;
};
void CreateReviewDataset(TableCatalog &tables, const ReviewDatasetSpec &spec = {});

//! `name`(id INTEGER, text VARCHAR) with `rows` rows drawn from `distinct` texts; every text occurs at least
//! once when rows >= distinct.
void CreateDuplicateDataset(TableCatalog &tables, const std::string &name, size_t rows, size_t distinct,
                            uint64_t seed = 11);

} // namespace semaquery
