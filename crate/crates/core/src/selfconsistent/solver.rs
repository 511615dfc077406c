use super::grid::{add_free_propagator, free_propagator_freq, pole, FreqGrid};
use super::{RunConfig, Scheme};
use crate::chain::ModeSet;
use crate::{Error, Result, C64};

/// Σ(ω_j) = i·prefactor·∫dt e^{iω_j t} S(t)^{2n+1} on the grid.
///
/// Fails with [`Error::Aliasing`] when |Im Σ| within 5% of the Nyquist edge
/// exceeds `aliasing_tol` times its peak. Re Σ carries a 1/ω² tail from the
/// kink of S(t) at t = 0 and is not a useful indicator.
pub fn bath_self_energy(s: &[C64], n: usize, prefactor: f64, grid: &FreqGrid, aliasing_tol: f64) -> Result<Vec<C64>> {
    let p = (2 * n + 1) as i32;
    let mut buf: Vec<C64> = s.iter().map(|v| v.powi(p)).collect();
    grid.to_freq(&mut buf);
    let f = C64::new(0.0, prefactor);
    buf.iter_mut().for_each(|v| *v *= f);
    check_aliasing(&buf, grid, aliasing_tol)?;
    Ok(buf)
}

fn check_aliasing(sigma: &[C64], grid: &FreqGrid, tol: f64) -> Result<()> {
    let edge = 0.95 * grid.omega_max();
    let mut peak: f64 = 0.0;
    let mut outer: f64 = 0.0;
    for (j, v) in sigma.iter().enumerate() {
        let a = v.im.abs();
        peak = peak.max(a);
        if grid.omega(j).abs() > edge {
            outer = outer.max(a);
        }
    }
    if peak > 0.0 && outer > tol * peak {
        return Err(Error::Aliasing(outer / peak));
    }
    Ok(())
}

/// One solved mode, handed to the visitor while its arrays are still alive.
#[derive(Debug)]
pub struct ModeSolution<'a> {
    pub k: usize,
    pub omega: f64,
    pub scheme: Scheme,
    /// Bath labels 2n+1, parallel to `sigma`.
    pub baths: &'a [usize],
    pub sigma: &'a [Vec<C64>],
    /// Re Σ_{k;2n+1}(0) per bath.
    pub re_sigma0: &'a [f64],
}

#[derive(Clone, Debug, PartialEq)]
pub struct ModeSelfEnergy {
    pub k: usize,
    pub omega: f64,
    pub re_sigma0: Vec<f64>,
    /// Σ_{k;2n+1} at the grid point nearest ω_k.
    pub at_mode: Vec<C64>,
    pub full: Option<Vec<Vec<C64>>>,
}

impl ModeSelfEnergy {
    /// Re Σ_k(0) summed over the baths.
    pub fn re_sigma0_total(&self) -> f64 {
        self.re_sigma0.iter().sum()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SelfEnergyTable {
    pub scheme: Scheme,
    pub baths: Vec<usize>,
    pub modes: Vec<ModeSelfEnergy>,
}

impl SelfEnergyTable {
    pub fn get(&self, k: usize) -> Option<&ModeSelfEnergy> {
        self.modes.iter().find(|m| m.k == k)
    }
}

pub fn solve(modes: &ModeSet, ej: f64, scheme: Scheme, cfg: &RunConfig) -> Result<SelfEnergyTable> {
    let grid = cfg.grid()?;
    solve_with(modes, ej, scheme, cfg, &grid, |_| Ok(()))
}

/// Runs one scheme over the modes in `cfg.window`, calling `visit` for each
/// solved mode in ascending order.
pub fn solve_with<F>(
    modes: &ModeSet,
    ej: f64,
    scheme: Scheme,
    cfg: &RunConfig,
    grid: &FreqGrid,
    mut visit: F,
) -> Result<SelfEnergyTable>
where
    F: FnMut(&ModeSolution<'_>) -> Result<()>,
{
    cfg.validate()?;
    if grid.len() != cfg.points || (grid.omega_max() - cfg.omega_max).abs() > 1e-12 * cfg.omega_max {
        return Err(Error::param("grid", "does not match the run config"));
    }
    let ctx = Context::new(modes, ej, cfg, grid);
    let mut table = SelfEnergyTable { scheme, baths: cfg.baths.clone(), modes: Vec::new() };
    let Some(last) = ctx.targets.last().copied() else {
        return Ok(table);
    };
    let mut record = |k: usize, sigma: &[Vec<C64>], visit: &mut F| -> Result<()> {
        let re_sigma0: Vec<f64> = sigma.iter().map(|s| s[0].re).collect();
        let omega = modes.omega[k];
        let sol = ModeSolution { k, omega, scheme, baths: &cfg.baths, sigma, re_sigma0: &re_sigma0 };
        visit(&sol)?;
        let j = grid.index_of(omega);
        table.modes.push(ModeSelfEnergy {
            k,
            omega,
            at_mode: sigma.iter().map(|s| s[j]).collect(),
            full: cfg.record.contains(&k).then(|| sigma.to_vec()),
            re_sigma0,
        });
        Ok(())
    };

    match scheme {
        Scheme::Bare => {
            let mut s = vec![C64::new(0.0, 0.0); grid.len()];
            for k in ctx.bath_modes() {
                add_free_propagator(&mut s, modes.f2[k], modes.omega[k], cfg.gamma_b, grid);
            }
            // Σ_k = f_k² × (common part)
            let common = ctx
                .ns
                .iter()
                .map(|&n| bath_self_energy(&s, n, ctx.prefactor(n, 1.0), grid, cfg.aliasing_tol))
                .collect::<Result<Vec<_>>>()?;
            drop(s);
            for &k in &ctx.targets {
                let f2 = modes.f2[k];
                let sigma: Vec<Vec<C64>> = common.iter().map(|c| c.iter().map(|v| v * f2).collect()).collect();
                record(k, &sigma, &mut visit)?;
            }
        }
        Scheme::Dressed => {
            ctx.check_sorted(last)?;
            let mut s = vec![C64::new(0.0, 0.0); grid.len()];
            let mut empty = true;
            for k in ctx.bath_modes().take_while(|&k| k <= last) {
                let sigma = ctx.sigma_from(&s, empty, k)?;
                let mut total = vec![C64::new(0.0, 0.0); grid.len()];
                for b in &sigma {
                    total.iter_mut().zip(b).for_each(|(t, v)| *t += v);
                }
                if ctx.is_target(k) {
                    record(k, &sigma, &mut visit)?;
                }
                drop(sigma);
                ctx.add_dressed(&mut s, k, if empty { None } else { Some(&total) });
                empty = false;
            }
        }
        Scheme::Partial => {
            ctx.check_sorted(last)?;
            let mut ss = vec![vec![C64::new(0.0, 0.0); grid.len()]; ctx.ns.len()];
            let mut empty = true;
            for k in ctx.bath_modes().take_while(|&k| k <= last) {
                let sigma =
                    ctx.ns.iter().zip(&ss).map(|(&n, s)| ctx.one_sigma(s, empty, n, k)).collect::<Result<Vec<_>>>()?;
                if ctx.is_target(k) {
                    record(k, &sigma, &mut visit)?;
                }
                for (s, b) in ss.iter_mut().zip(&sigma) {
                    ctx.add_dressed(s, k, if empty { None } else { Some(b) });
                }
                empty = false;
            }
        }
    }
    Ok(table)
}

struct Context<'a> {
    modes: &'a ModeSet,
    cfg: &'a RunConfig,
    grid: &'a FreqGrid,
    ns: Vec<usize>,
    /// 2E_J² e^{−Σf²}.
    scale: f64,
    targets: Vec<usize>,
}

impl<'a> Context<'a> {
    fn new(modes: &'a ModeSet, ej: f64, cfg: &'a RunConfig, grid: &'a FreqGrid) -> Self {
        let targets = (0..modes.len())
            .filter(|&k| modes.is_bath_mode(k) && modes.omega[k] >= cfg.window.0 && modes.omega[k] <= cfg.window.1)
            .collect();
        Self {
            modes,
            cfg,
            grid,
            ns: cfg.baths.iter().map(|b| (b - 1) / 2).collect(),
            scale: 2.0 * ej * ej * (-modes.sum_f2()).exp(),
            targets,
        }
    }

    fn bath_modes(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.modes.len()).filter(|&k| self.modes.is_bath_mode(k))
    }

    fn is_target(&self, k: usize) -> bool {
        self.targets.binary_search(&k).is_ok()
    }

    fn check_sorted(&self, last: usize) -> Result<()> {
        match self.modes.omega[..=last].windows(2).position(|w| !(w[1] > w[0])) {
            Some(i) => Err(Error::Ordering(i + 1)),
            None => Ok(()),
        }
    }

    /// 2E_J² f² e^{−Σf²}/(2n+1)!.
    fn prefactor(&self, n: usize, f2: f64) -> f64 {
        let fact: f64 = (1..=2 * n + 1).map(|i| i as f64).product();
        self.scale * f2 / fact
    }

    fn one_sigma(&self, s: &[C64], empty: bool, n: usize, k: usize) -> Result<Vec<C64>> {
        let pref = self.prefactor(n, self.modes.f2[k]);
        if empty || pref == 0.0 {
            return Ok(vec![C64::new(0.0, 0.0); self.grid.len()]);
        }
        bath_self_energy(s, n, pref, self.grid, self.cfg.aliasing_tol)
    }

    fn sigma_from(&self, s: &[C64], empty: bool, k: usize) -> Result<Vec<Vec<C64>>> {
        self.ns.iter().map(|&n| self.one_sigma(s, empty, n, k)).collect()
    }

    /// s += f_k² iG̃^dr_k(t), with G̃^dr built from `sigma` (free if None).
    fn add_dressed(&self, s: &mut [C64], k: usize, sigma: Option<&[C64]>) {
        let (wk, gb, f2) = (self.modes.omega[k], self.cfg.gamma_b, self.modes.f2[k]);
        add_free_propagator(s, f2, wk, gb, self.grid);
        let Some(sigma) = sigma else { return };
        if sigma.iter().all(|v| *v == C64::new(0.0, 0.0)) {
            return;
        }
        let re0 = sigma[0].re;
        let w0 = pole(wk, gb);
        let mut buf: Vec<C64> = sigma
            .iter()
            .enumerate()
            .map(|(j, &sg)| {
                let w = self.grid.omega(j);
                let p = w0 - (sg - re0);
                2.0 * wk / (w * w - p * p) - free_propagator_freq(wk, gb, w)
            })
            .collect();
        self.grid.to_time(&mut buf);
        let c = C64::new(0.0, f2);
        s.iter_mut().zip(&buf).for_each(|(a, b)| *a += c * b);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::CouplingProfile;

    fn toy_modes() -> ModeSet {
        let profile = CouplingProfile::ExponentialCutoff { z: 0.5, cutoff: 20.0 };
        let omega: Vec<f64> = (0..12).map(|l| l as f64 + 0.5).collect();
        let f2 = omega.iter().map(|&w| profile.coupling(w, 1.0)).collect();
        ModeSet::synthetic(omega, f2, 1.0, profile)
    }

    fn cfg() -> RunConfig {
        RunConfig {
            omega_max: 80.0,
            points: 1 << 15,
            gamma_b: 0.1,
            schemes: vec![Scheme::Bare],
            baths: vec![3],
            window: (0.0, f64::INFINITY),
            realizations: 1,
            master_seed: 0,
            fit: Default::default(),
            per_bath: true,
            aliasing_tol: 1e-3,
            crossover_threshold: 1.0 / 3.0,
            record: vec![5],
        }
    }

    #[test]
    fn zero_coupling_gives_zero() {
        let t = solve(&toy_modes(), 0.0, Scheme::Dressed, &cfg()).unwrap();
        assert!(t.modes.iter().all(|m| m.at_mode.iter().all(|v| v.norm() == 0.0)));
    }

    #[test]
    fn parity_on_grid() {
        let c = cfg();
        let g = c.grid().unwrap();
        for scheme in [Scheme::Bare, Scheme::Partial, Scheme::Dressed] {
            let t = solve(&toy_modes(), 1.0, scheme, &c).unwrap();
            let full = &t.get(5).unwrap().full.as_ref().unwrap()[0];
            let peak = full.iter().map(|v| v.norm()).fold(0.0, f64::max);
            for j in 1..g.len() {
                assert!((full[j] - full[g.mirror(j)]).norm() < 1e-8 * peak, "{scheme:?}");
            }
        }
    }

    #[test]
    fn unsorted_modes_rejected() {
        let mut m = toy_modes();
        m.omega.swap(3, 4);
        assert!(matches!(solve(&m, 1.0, Scheme::Dressed, &cfg()), Err(Error::Ordering(4))));
        assert!(solve(&m, 1.0, Scheme::Bare, &cfg()).is_ok());
    }

    #[test]
    fn coarse_grid_aliases() {
        let mut c = cfg();
        c.omega_max = 12.0;
        c.points = 1 << 12;
        assert!(matches!(solve(&toy_modes(), 1.0, Scheme::Bare, &c), Err(Error::Aliasing(_))));
    }
}
