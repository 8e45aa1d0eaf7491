"""
SETAR-Tree and SETAR-Forest global forecasting models.

The command line entry point is setartree.cli; setartree.pipeline runs each
subcommand and can be driven directly with a RunConfig.
"""


if __name__ == '__main__':
    pass
