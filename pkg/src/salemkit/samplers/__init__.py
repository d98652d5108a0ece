from .adregular import (ADPlan, ad_constant, ad_plan, ad_regular_sample, ad_seed_sample,
                        counting_certificate, exact_ball_counts, fiber, minimal_n0)
from .blocks import (BlockPartition, block_collision, build_partition_blocks, cell_labels,
                     digit_box, is_block_sparse, modular, plain, residue_separated_sum)
from .pmf import Pmf, char_m, dirichlet, pmf, sample_digit_sum, uniform_sum_counts
from .twopartition import (FlowNetwork, SamplingDistribution, flow_network,
                           two_partition_decompose, two_partition_draw)

__all__ = [
    "ADPlan", "ad_constant", "ad_plan", "ad_regular_sample", "ad_seed_sample",
    "counting_certificate", "exact_ball_counts", "fiber", "minimal_n0",
    "BlockPartition", "block_collision", "build_partition_blocks", "cell_labels", "digit_box",
    "is_block_sparse", "modular", "plain", "residue_separated_sum",
    "Pmf", "char_m", "dirichlet", "pmf", "sample_digit_sum", "uniform_sum_counts",
    "FlowNetwork", "SamplingDistribution", "flow_network", "two_partition_decompose",
    "two_partition_draw",
]
