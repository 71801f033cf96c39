"""Pipeline services: evidence input, location, carving, analysis, merge, corpus, reports."""
