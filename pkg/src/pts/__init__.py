"""Persistence diagrams, perturbed topological signatures and Grassmann metrics."""
from .errors import PtsError, RankDeficientError, SeriesTooShortError, UnsupportedDimensionError
from .persistence import (FilteredComplex, PersistenceDiagram, ScalarGraph, delay_embed,
                          dedup_points, rips_complex, scalar_field_h0, series_persistence,
                          vr_persistence)
from .matching import bottleneck, brute_force_distance, diagram_distance, wasserstein
from .grassmann import (GrassmannPoint, chordal_distance, geodesic_distance,
                        normalized_geodesic, principal_angles, projection_kernel, rbf_kernel)
from .signature import (PersistenceSurface, PtsConfig, Scaling, aggregate_embeddings,
                        analytic_tangent_subspace, fit_scaling, kde_surface, perturb,
                        pts_embed, stability_bound, transform_axes)
from .learn import LabeledSet, export_gram, knn_classify, random_split
from .datasets import ShapeSpec, noise_ladder, sample_series, sample_shape

__version__ = "0.1.0"
