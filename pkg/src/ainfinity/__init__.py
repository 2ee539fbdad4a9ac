"""Exact-arithmetic computations with homotopy-associative structures.

The package provides, over exact coefficient rings (rationals, prime
fields, univariate polynomials and their fraction fields):

* graded spaces, sparse multilinear operators and one auditable sign
  convention (:mod:`ainfinity.graded`, :mod:`ainfinity.signs`);
* structure and morphism relation checkers with bar-construction
  counterparts as independent oracles (:mod:`ainfinity.algebras`,
  :mod:`ainfinity.modules`, :mod:`ainfinity.bar`);
* minimal models by homotopy transfer (:mod:`ainfinity.transfer`);
* bigraded Hochschild cohomology, base change and Rees deformations
  (:mod:`ainfinity.hochschild`);
* obstruction classes, the inductive module formality prover, the
  interpolating one-parameter deformation and truncated gauge
  trivialization (:mod:`ainfinity.formality`);
* Smith normal form and the fibre-dimension freeness criterion for
  complexes over a polynomial ring (:mod:`ainfinity.polycomplex`);
* a versioned document format and a batch command line
  (:mod:`ainfinity.documents`, :mod:`ainfinity.cli`).
"""

from .algebras import (SATURATED, AInfAlgebra, AlgMorphism, RelationFailure,
                       ainf_algebra, alg_morphism, check_alg_morphism,
                       check_alg_relations, cohomology, compose_alg_morphisms,
                       declare_saturated, dga, graded_algebra,
                       identity_alg_morphism, is_quasi_iso)
from .bar import bar_check, bar_differential, module_bar_check
from .contraction import Contraction, contraction_from_complex, normalize_contraction
from .exceptions import (CoefficientError, DocumentError, EngineError,
                         ShapeError, StructureError)
from .formality import (FormalityCertificate, ObstructionReport,
                        TrivializationObstruction, TrivializationResult,
                        an_formality_check, first_module_obstruction,
                        normal_cone_deform, normal_cone_fibre,
                        normal_cone_witness, obstruction_module_extension,
                        obstruction_morphism_extension, prove_module_formality,
                        solve_primitive, transport_source_through,
                        transport_target_through,
                        trivialize_truncated_deformation, verify_certificate)
from .graded import (GradedMap, GradedSpace, MultiOp, apply_multi,
                     compose_graded, desuspend_op, graded_space, multiop,
                     suspend_op, tensor_basis)
from .hochschild import (CohomologyClass, Filtration, HochschildCochain,
                         ReesDeformation, algebra_hh_dimension, class_of,
                         cochain, exactness_witness, filtration,
                         hh_decomposition_over_poly, hh_group, hochschild_d,
                         rees_deformation, rees_fibre_algebra,
                         rees_fibre_module)
from .modules import (AInfModule, ModMorphism, Pair, PairMorphism,
                      ainf_module, algebra_as_module, check_mod_morphism,
                      check_mod_relations, check_pair, compose_mod_morphisms,
                      declare_module_saturated, identity_mod_morphism,
                      is_mod_quasi_iso, mod_morphism, restrict_along,
                      truncate_to_M2)
from .polycomplex import (CohomologyDecomposition, FreenessReport, PolyComplex,
                          fibre_dims, freeness_test, invariant_factors,
                          poly_cohomology, poly_complex, smith_normal_form,
                          solve_over_pid)
from .rings import (RATIONALS, RingDescriptor, RingMap, Scalar,
                    base_change_scalar, embed_fraction, eval_at,
                    evaluation_map, fraction_embedding, fraction_field,
                    from_coeffs, from_int, identity_map, mod_p_map, one,
                    poly_ring, polynomial_embedding, prime_field,
                    truncated_poly_ring, truncation_map, variable, zero)
from .transfer import (ProbeVerdict, minimal_pair_equiv_probe, transfer_algebra,
                       transfer_pair)

__version__ = "0.1.0"
