from __future__ import print_function

from .errorlog import ErrorLog, errorlog
from .errors import NdsIdentException
from .model import DescriptorSubsystem, Topology, NdsModel, assemble_nds, phi_of_theta, check_regularity, transfer_eval
from .generator import InputGenerator, analyze_generator, coefficients, psi, input_u
from .simulate import solve_sylvester, steady_state_response, full_response, make_schedule, measure
from .stage1 import estimate_batch, rls_init, rls_update, oracle_eta
from .stage2 import identify_stage2, identifiability_report
from .identify import run_identification
from .cli import main


if __name__ == "__main__":
    main()


# vim: expandtab tabstop=4 shiftwidth=4 softtabstop=4 nowrap
