"""
Estimator Configurations
"""

# Estimator registry - the service routes on 'solver' and builds the layout from 'blocks'
ESTIMATOR_CONFIGS = {
    'cca': {
        'display_name': 'CCA',
        'description': 'Complete-case cause-specific Cox partial likelihood',
        'blocks': ('beta',),
        'solver': 'maximize',
        'requires_aux': False,
        'missingness': None,
    },
    'lq2': {
        'display_name': 'LQ2',
        'description': 'Informative partial likelihood L*_Q2 with auxiliary case covariate',
        'blocks': ('beta', 'eta', 'psi'),
        'solver': 'maximize',
        'requires_aux': True,
        'missingness': None,
    },
    'ly': {
        'display_name': 'LY',
        'description': 'NMAR partial likelihood L*_Y, missingness logistic in (t, x, y)',
        'blocks': ('beta', 'eta', 'gamma'),
        'solver': 'maximize',
        'requires_aux': False,
        'missingness': 'ly_missingness',
    },
    'gr': {
        'display_name': 'GR',
        'description': 'Goetghebeur-Ryan estimating equations, missingness logistic in (t, x)',
        'blocks': ('beta', 'eta', 'gamma'),
        'solver': 'root',
        'requires_aux': False,
        'missingness': 'gr_missingness',
    },
    'lstar': {
        'display_name': 'L*',
        'description': 'Joint partial likelihood L* without auxiliary information',
        'blocks': ('beta', 'eta'),
        'solver': 'maximize',
        'requires_aux': False,
        'missingness': None,
    },
}

# Estimators run by default in simulations and fits
DEFAULT_ESTIMATORS = ('cca', 'lq2', 'ly', 'gr')
