"""
CLI interface for nlevel-factor.

Commands:
- nfactor factorize / meanfield / spectrum / entangle / project
- nfactor reproduce <figure|all>
- nfactor run <file>
"""
