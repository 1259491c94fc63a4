"""
Iterative scaling drivers.

channel_ipf cycles normalized IJ-scalings of a channel, joint_ipf is classical iterative
proportional fitting of a joint distribution and serves as the reference implementation, and
ri_project turns the channel algorithm into the rI-projection onto an exponential family: the
unique channel with the prescribed marginals in the family generated by the reference channel.

One iteration in every trace is a full sweep over the constraint list, in list order.
"""
import math
import time
from typing import List
from typing import NamedTuple
from typing import Optional
from typing import Sequence
from typing import Tuple

import numpy as np

from channel_scaling.exceptions import SpaceMismatchError
from channel_scaling.models import Channel
from channel_scaling.models import DivergenceValue
from channel_scaling.models import FamilySpec
from channel_scaling.models import InputDistribution
from channel_scaling.models import JointDistribution
from channel_scaling.models import JointProjectionResult
from channel_scaling.models import MarginalSpec
from channel_scaling.models import ProductSpace
from channel_scaling.models import ProjectionResult
from channel_scaling.models import SolverOptions
from channel_scaling.models import SubsetPair
from channel_scaling.models import TraceRecord
from channel_scaling.operations.common import channel_marginal_tensor
from channel_scaling.operations.common import check_reduced_space
from channel_scaling.operations.common import check_same_space
from channel_scaling.operations.common import expand_reduced
from channel_scaling.operations.common import input_weights
from channel_scaling.operations.common import joint_tensor
from channel_scaling.operations.common import marginal_tensor
from channel_scaling.operations.divergence import kl_channel
from channel_scaling.operations.divergence import kl_nats
from channel_scaling.operations.marginals import compose
from channel_scaling.operations.marginals import joint_marginal
from channel_scaling.operations.marginals import uniform_channel
from channel_scaling.operations.marginals import uniform_input
from channel_scaling.operations.scaling import ij_scale_raw_array
from channel_scaling.operations.scaling import joint_scale_array
from channel_scaling.operations.scaling import normalize_rows_array


JointConstraint = Tuple[SubsetPair, JointDistribution]


class RIProjection(NamedTuple):
    limit: Channel
    divergence: DivergenceValue
    result: ProjectionResult


def _pythagoras_defect(
    target_to_start: float, target_to_limit: float, limit_to_start: float
) -> Optional[float]:
    """
    |D(target||start) - D(target||limit) - D(limit||start)|, None if a term is infinite.
    """
    values = (target_to_start, target_to_limit, limit_to_start)
    if any(math.isinf(value) for value in values):
        return None
    return abs(target_to_start - target_to_limit - limit_to_start)


def channel_ipf(
    k0: Channel,
    p: InputDistribution,
    family: FamilySpec,
    opts: SolverOptions = SolverOptions(),
    target: Optional[Channel] = None,
) -> ProjectionResult:
    """
    Iterate k^j = N sigma_{I_j J_j} k^{j-1} over the family's specs, starting at k0, with the
    marginals of family.prescription under p as prescriptions.

    Stops after the first full sweep whose residual max |p(x_I) (k^j - kbar)(x_I;y_J)| over all
    specs and cells is at most opts.tolerance. Running out of sweeps is not an error: the last
    iterate is returned with converged=False.

    :param k0: strictly positive starting channel, usually uniform
    :param p: strictly positive input distribution
    :param family: constraint list and prescription channel
    :param opts: solver options
    :param target: channel whose divergence D_p(target||k^j) is traced, if any
    :return: ProjectionResult holding the limit channel
    """
    prescription = family.prescription
    space = check_same_space(k0.space, p.space, prescription.space)
    if target is not None:
        check_same_space(space, target.space)

    prescribed = [
        channel_marginal_tensor(space, p.probs, prescription.rows, spec) for spec in family.specs
    ]
    weighted = [
        kbar * input_weights(space, p.probs, spec) for kbar, spec in zip(prescribed, family.specs)
    ]
    weights = p.probs[:, None]
    prescribed_joint = weights * prescription.rows
    target_joint = None if target is None else weights * target.rows

    rows = np.array(k0.rows)
    trace: List[TraceRecord] = []
    iterates: List[np.ndarray] = []
    residual = math.inf
    converged = False
    sweeps = 0
    started = time.perf_counter_ns()

    for sweeps in range(1, opts.max_sweeps + 1):
        for spec, kbar in zip(family.specs, prescribed):
            rows, _ = normalize_rows_array(ij_scale_raw_array(space, p.probs, rows, kbar, spec))
            if opts.keep_iterates:
                iterates.append(rows)

        joint = joint_tensor(space, p.probs, rows)
        residual = max(
            float(np.max(np.abs(marginal_tensor(space, joint, spec) - expected)))
            for spec, expected in zip(family.specs, weighted)
        )
        if opts.trace_enabled:
            trace.append(
                TraceRecord(
                    sweep=sweeps,
                    divergence_to_prescription_nats=kl_nats(weights * rows, prescribed_joint),
                    divergence_from_target_nats=None
                    if target_joint is None
                    else kl_nats(target_joint, weights * rows),
                    residual=residual,
                    elapsed_ns=time.perf_counter_ns() - started,
                )
            )
        if residual <= opts.tolerance:
            converged = True
            break

    limit = Channel(space=space, rows=rows)
    defect = None
    if converged:
        start_joint = weights * k0.rows
        limit_joint = weights * limit.rows
        defect = _pythagoras_defect(
            kl_nats(prescribed_joint, start_joint),
            kl_nats(prescribed_joint, limit_joint),
            kl_nats(limit_joint, start_joint),
        )
    return ProjectionResult(
        limit=limit,
        sweeps_used=sweeps,
        converged=converged,
        residual=residual,
        trace=trace,
        iterates=iterates,
        pythagoras_defect=defect,
    )


def joint_ipf(
    q0: JointDistribution,
    constraints: Sequence[JointConstraint],
    opts: SolverOptions = SolverOptions(),
    target: Optional[JointDistribution] = None,
) -> JointProjectionResult:
    """
    Classical iterative proportional fitting: cycle joint scalings onto the prescribed marginals.

    :param q0: starting joint, strictly positive for the convergence guarantees
    :param constraints: (I,J) pairs with their prescribed marginals on X_I x Y_J, mutually
        consistent
    :param opts: solver options
    :param target: a joint in the intersection (e.g. the one the prescriptions came from); traced
        and used for the Pythagoras defect
    :return: JointProjectionResult holding the limit joint
    """
    space = q0.space
    if not constraints:
        raise SpaceMismatchError("joint_ipf needs at least one constraint")
    for pair, prescribed in constraints:
        check_reduced_space(space, pair, prescribed.space, "Prescribed marginal")
    if target is not None:
        check_same_space(space, target.space)
    expected = [expand_reduced(space, prescribed.probs, pair) for pair, prescribed in constraints]

    probs = np.array(q0.probs)
    trace: List[TraceRecord] = []
    iterates: List[np.ndarray] = []
    residual = math.inf
    converged = False
    sweeps = 0
    started = time.perf_counter_ns()

    for sweeps in range(1, opts.max_sweeps + 1):
        for pair, prescribed in constraints:
            probs = joint_scale_array(space, probs, pair, prescribed.probs)
            if opts.keep_iterates:
                iterates.append(probs)

        tensor = probs.reshape(space.tensor_shape)
        residual = max(
            float(np.max(np.abs(marginal_tensor(space, tensor, pair) - marginal)))
            for (pair, _), marginal in zip(constraints, expected)
        )
        if opts.trace_enabled:
            trace.append(
                TraceRecord(
                    sweep=sweeps,
                    divergence_to_prescription_nats=None
                    if target is None
                    else kl_nats(probs, target.probs),
                    divergence_from_target_nats=None
                    if target is None
                    else kl_nats(target.probs, probs),
                    residual=residual,
                    elapsed_ns=time.perf_counter_ns() - started,
                )
            )
        if residual <= opts.tolerance:
            converged = True
            break

    limit = JointDistribution(space=space, probs=probs)
    defect = None
    if converged and target is not None:
        defect = _pythagoras_defect(
            kl_nats(target.probs, q0.probs),
            kl_nats(target.probs, limit.probs),
            kl_nats(limit.probs, q0.probs),
        )
    return JointProjectionResult(
        limit=limit,
        sweeps_used=sweeps,
        converged=converged,
        residual=residual,
        trace=trace,
        iterates=iterates,
        pythagoras_defect=defect,
    )


def lift_channel_problem(
    p: InputDistribution,
    k0: Channel,
    family: FamilySpec,
    interleave_inputs: bool = True,
) -> Tuple[JointDistribution, List[JointConstraint]]:
    """
    The joint problem behind a channel problem: start p k0, prescribe the (I,J)-marginals of
    p kbar and the input marginal p.

    With interleave_inputs the input constraint follows every (I,J) constraint, so that every
    second joint iterate equals p times the matching channel iterate. Otherwise the input
    constraint comes once, first, as in the traditional joint formulation.
    """
    space = check_same_space(p.space, k0.space, family.prescription.space)
    inputs = SubsetPair.inputs_only(space)
    input_constraint = (inputs, JointDistribution(space=space.reduced(inputs), probs=p.probs))
    prescribed_joint = compose(p, family.prescription)

    constraints: List[JointConstraint] = [] if interleave_inputs else [input_constraint]
    for spec in family.specs:
        constraints.append((spec, joint_marginal(prescribed_joint, spec)))
        if interleave_inputs:
            constraints.append(input_constraint)
    return compose(p, k0), constraints


def ri_project(
    k: Channel,
    specs: Sequence[MarginalSpec],
    k0: Optional[Channel] = None,
    p: Optional[InputDistribution] = None,
    opts: SolverOptions = SolverOptions(),
) -> RIProjection:
    """
    rI-projection of k onto the exponential family E(k0, span F_{I_i J_i}).

    The projection is the element of that family sharing k's (I_i,J_i)-marginals, which is what
    channel_ipf converges to when started at k0 with k as prescription.
    :param k: channel to project
    :param specs: the (I,J) pairs generating the family
    :param k0: reference channel, uniform by default
    :param p: input distribution, uniform by default
    :param opts: solver options
    :return: limit channel, D_p(k||limit) and the full solver result
    """
    k0 = uniform_channel(k.space) if k0 is None else k0
    p = uniform_input(k.space) if p is None else p
    result = channel_ipf(k0, p, FamilySpec(specs=tuple(specs), prescription=k), opts, target=k)
    return RIProjection(result.limit, kl_channel(p, k, result.limit), result)


def exp_tilt(
    k0: Channel, specs: Sequence[MarginalSpec], functions: Sequence[np.ndarray]
) -> Channel:
    """
    Member of E(k0, span F_{I_i J_i}): k0(x;y) exp(sum_i f_i(x_I, y_J)) / Z(x).
    :param k0: reference channel
    :param specs: the (I,J) pairs
    :param functions: one array per spec, with |X_I| * |Y_J| values in reduced flat order
    :return: the tilted, row-normalized channel
    """
    space: ProductSpace = k0.space
    if len(specs) != len(functions):
        raise SpaceMismatchError(f"{len(specs)} specs but {len(functions)} functions")
    exponent = np.zeros(space.tensor_shape)
    for spec, function in zip(specs, functions):
        reduced = space.reduced(spec)
        values = np.asarray(function, dtype=float)
        if values.size != reduced.input_size * reduced.output_size:
            raise SpaceMismatchError(
                f"function for I={list(spec.I)}, J={list(spec.J)} has {values.size} values, "
                f"expected {reduced.input_size * reduced.output_size}"
            )
        exponent = exponent + expand_reduced(space, values, spec)
    exponent = exponent.reshape(space.input_size, space.output_size)
    # shift by the row maximum over the support of k0 so exp cannot overflow
    support = k0.rows > 0
    shift = np.where(support, exponent, -np.inf).max(axis=1, keepdims=True)
    tilted = np.where(support, k0.rows * np.exp(np.where(support, exponent - shift, 0.0)), 0.0)
    rows, _ = normalize_rows_array(tilted)
    return Channel(space=space, rows=rows)
