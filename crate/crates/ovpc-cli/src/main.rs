//! Command-line front end. Every subcommand except `serve` is a client of the
//! mapping service: it talks to `--server` when given, otherwise it spins up
//! an embedded server on an ephemeral local port. File I/O stays on the
//! client side; geometry runs in the service.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{ArgGroup, Parser, Subcommand};

use ovpc_api as api;
use ovpc_client::{Client, ClientError};
use ovpc_core::eval::{Method, SceneSpec, SweepConfig};
use ovpc_core::geom::Point3;
use ovpc_core::io;
use ovpc_core::navmap::{RobotBox, Se2State};

const EXIT_USAGE: u8 = 1;
const EXIT_DATA: u8 = 2;
const EXIT_PIPELINE: u8 = 3;

#[derive(Parser)]
#[command(
    name = "ovpc",
    version,
    about = "Visible-point free-space meshes and traversability maps from local point clouds"
)]
struct Cli {
    /// Mapping service to talk to; an embedded server is started when absent.
    #[arg(long, global = true, value_name = "URL")]
    server: Option<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the mapping service.
    Serve {
        #[arg(long, default_value = "127.0.0.1:7070")]
        addr: String,
    },
    /// Build the free-space mesh for one cloud.
    Mesh {
        #[arg(long = "in", value_name = "CLOUD")]
        input: PathBuf,
        /// Sensor position as X,Y,Z.
        #[arg(long, value_name = "X,Y,Z")]
        viewpoint: String,
        #[arg(long, default_value_t = ovpc_core::ghpr::GhprConfig::DEFAULT_GAMMA)]
        gamma: f64,
        #[arg(long, value_name = "MESH")]
        out: PathBuf,
    },
    /// Build the classified navigation map (and optionally the mesh).
    Navmap {
        #[arg(long = "in", value_name = "CLOUD")]
        input: PathBuf,
        #[arg(long, value_name = "X,Y,Z")]
        viewpoint: String,
        #[arg(long, default_value_t = ovpc_core::ghpr::GhprConfig::DEFAULT_GAMMA)]
        gamma: f64,
        #[arg(long = "alpha-max-deg", default_value_t = 30.0)]
        alpha_max_deg: f64,
        #[arg(long = "dh-max", default_value_t = 0.25)]
        dh_max: f64,
        #[arg(long, value_name = "NAVMAP")]
        out: PathBuf,
        #[arg(long = "mesh-out", value_name = "MESH")]
        mesh_out: Option<PathBuf>,
    },
    /// Replay scans through the buffered per-frame pipeline.
    Pipeline {
        /// Directory of scan files (sorted by name, one per pose row).
        #[arg(long, value_name = "DIR")]
        scans: PathBuf,
        /// CSV with rows timestamp,x,y,z,qw,qx,qy,qz.
        #[arg(long, value_name = "CSV")]
        poses: PathBuf,
        #[arg(long, value_name = "FILE")]
        config: PathBuf,
        #[arg(long = "out-dir", value_name = "DIR")]
        out_dir: PathBuf,
    },
    /// Query a stored navigation map.
    #[command(group(
        ArgGroup::new("what").required(true).args(["nearest", "project", "collide"])
    ))]
    Query {
        #[arg(long, value_name = "FILE")]
        navmap: PathBuf,
        /// Nearest map point to X,Y,Z.
        #[arg(long, value_name = "X,Y,Z")]
        nearest: Option<String>,
        /// Project a planar state X,Y,THETA_DEG,ZREF onto the surface.
        #[arg(long, value_name = "X,Y,THETA_DEG,ZREF")]
        project: Option<String>,
        /// Collision-check POSE (x,y,z,qw,qx,qy,qz) against BOX (L,W,H,ZOFF).
        #[arg(long, num_args = 2, value_names = ["POSE", "BOX"])]
        collide: Option<Vec<String>>,
    },
    /// Run the synthetic normal-accuracy sweep and write its table.
    SynthEval {
        #[arg(long = "slope-min", default_value_t = 0.0)]
        slope_min: f64,
        #[arg(long = "slope-max", default_value_t = 35.0)]
        slope_max: f64,
        #[arg(long, default_value_t = 1.0)]
        step: f64,
        #[arg(long, default_value_t = 3)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Kernel exponent for the study mesh (the synthetic scenes are far
        /// denser than real bundled scans, hence a stronger default than the
        /// driving pipeline's).
        #[arg(long, default_value_t = SweepConfig::DEFAULT_GAMMA)]
        gamma: f64,
        /// Keep vertices within 1 m of the footprint edge in the statistics.
        #[arg(long = "include-rim", default_value_t = false)]
        include_rim: bool,
        #[arg(long, value_name = "CSV")]
        out: PathBuf,
    },
    /// Time the per-cloud map build over a directory of clouds.
    Bench {
        #[arg(long = "in", value_name = "DIR")]
        input: PathBuf,
        #[arg(long, default_value_t = 5)]
        iterations: usize,
        #[arg(long, value_name = "X,Y,Z", default_value = "0,0,0")]
        viewpoint: String,
        #[arg(long, value_name = "CSV")]
        out: PathBuf,
    },
}

#[derive(Debug)]
enum CliError {
    Usage(String),
    Data(String),
    Pipeline(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Data(_) => EXIT_DATA,
            CliError::Pipeline(_) => EXIT_PIPELINE,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Data(m) | CliError::Pipeline(m) => m,
        }
    }
}

impl From<ClientError> for CliError {
    fn from(err: ClientError) -> Self {
        let message = err.to_string();
        match err.kind() {
            "usage" => CliError::Usage(message),
            "data" | "not_found" => CliError::Data(message),
            _ => CliError::Pipeline(message),
        }
    }
}

impl From<io::IoError> for CliError {
    fn from(err: io::IoError) -> Self {
        CliError::Data(err.to_string())
    }
}

fn parse_triple(text: &str, what: &str) -> Result<Point3, CliError> {
    let parts: Vec<&str> = text.split(',').map(str::trim).collect();
    if parts.len() != 3 {
        return Err(CliError::Usage(format!(
            "{what} must be X,Y,Z, got {text:?}"
        )));
    }
    let mut values = [0.0; 3];
    for (v, p) in values.iter_mut().zip(parts.iter()) {
        *v = p
            .parse()
            .map_err(|_| CliError::Usage(format!("{what}: bad number {p:?}")))?;
    }
    Ok(Point3::new(values[0], values[1], values[2]))
}

fn parse_numbers(text: &str, n: usize, what: &str) -> Result<Vec<f64>, CliError> {
    let parts: Vec<&str> = text.split(',').map(str::trim).collect();
    if parts.len() != n {
        return Err(CliError::Usage(format!(
            "{what} needs {n} comma-separated numbers, got {}",
            parts.len()
        )));
    }
    parts
        .iter()
        .map(|p| {
            p.parse()
                .map_err(|_| CliError::Usage(format!("{what}: bad number {p:?}")))
        })
        .collect()
}

/// Cloud files in a directory, sorted by file name.
fn cloud_files(dir: &Path) -> Result<Vec<PathBuf>, CliError> {
    let mut files: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(|e| CliError::Data(format!("{}: {e}", dir.display())))?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|p| {
            p.extension()
                .and_then(|e| e.to_str())
                .map(|e| {
                    let e = e.to_ascii_lowercase();
                    e == "xyz" || e == "txt" || e == "asc" || e == "ply"
                })
                .unwrap_or(false)
        })
        .collect();
    files.sort();
    if files.is_empty() {
        return Err(CliError::Data(format!(
            "{}: no cloud files (.xyz/.txt/.asc/.ply)",
            dir.display()
        )));
    }
    Ok(files)
}

async fn connect(server: &Option<String>) -> Result<Client, CliError> {
    let base = match server {
        Some(url) => url.clone(),
        None => {
            let addr = ovpc_service::spawn_ephemeral()
                .await
                .map_err(|e| CliError::Pipeline(format!("embedded server: {e}")))?;
            format!("http://{addr}")
        }
    };
    let client = Client::new(base);
    client.health().await?;
    Ok(client)
}

async fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Serve { addr } => {
            tracing_subscriber::fmt::try_init().ok();
            let listener = tokio::net::TcpListener::bind(&addr)
                .await
                .map_err(|e| CliError::Pipeline(format!("bind {addr}: {e}")))?;
            println!(
                "mapping service listening on {}",
                listener
                    .local_addr()
                    .map_err(|e| CliError::Pipeline(e.to_string()))?
            );
            ovpc_service::serve(listener)
                .await
                .map_err(|e| CliError::Pipeline(e.to_string()))
        }
        Command::Mesh {
            input,
            viewpoint,
            gamma,
            out,
        } => {
            let viewpoint = parse_triple(&viewpoint, "--viewpoint")?;
            let cloud = io::read_cloud(&input)?;
            let client = connect(&cli.server).await?;
            let response = client
                .mesh(&api::MeshRequest {
                    cloud,
                    ghpr: api::GhprParams {
                        gamma,
                        ..api::GhprParams::at(viewpoint)
                    },
                    traversability: api::TravParams::default(),
                })
                .await?;
            io::write_mesh(&out, &response.mesh, &response.face_labels)?;
            println!(
                "mesh: {} vertices, {} faces ({} visible points, {} dropped near the viewpoint) -> {}",
                response.mesh.vertices.len(),
                response.mesh.faces.len(),
                response.visible_count,
                response.dropped_near,
                out.display()
            );
            Ok(())
        }
        Command::Navmap {
            input,
            viewpoint,
            gamma,
            alpha_max_deg,
            dh_max,
            out,
            mesh_out,
        } => {
            let viewpoint = parse_triple(&viewpoint, "--viewpoint")?;
            let cloud = io::read_cloud(&input)?;
            let client = connect(&cli.server).await?;
            let response = client
                .navmap(&api::NavmapRequest {
                    cloud,
                    ghpr: api::GhprParams {
                        gamma,
                        ..api::GhprParams::at(viewpoint)
                    },
                    traversability: api::TravParams {
                        alpha_max_deg,
                        dh_max,
                    },
                    include_mesh: mesh_out.is_some(),
                })
                .await?;
            io::write_navmap(&out, &response.navmap)?;
            let traversable = response
                .navmap
                .traversable()
                .iter()
                .filter(|&&t| t)
                .count();
            println!(
                "navmap: {} points ({} traversable) -> {}",
                response.navmap.len(),
                traversable,
                out.display()
            );
            if let (Some(path), Some(mesh), Some(labels)) =
                (mesh_out, response.mesh, response.face_labels)
            {
                io::write_mesh(&path, &mesh, &labels)?;
                println!("mesh: {} faces -> {}", mesh.faces.len(), path.display());
            }
            Ok(())
        }
        Command::Pipeline {
            scans,
            poses,
            config,
            out_dir,
        } => {
            let cfg = io::read_config(&config)?;
            let pose_rows = io::read_poses_csv(&poses)?;
            let files = cloud_files(&scans)?;
            if files.len() != pose_rows.len() {
                return Err(CliError::Data(format!(
                    "{} scan files but {} pose rows",
                    files.len(),
                    pose_rows.len()
                )));
            }
            std::fs::create_dir_all(&out_dir)
                .map_err(|e| CliError::Data(format!("{}: {e}", out_dir.display())))?;
            io::write_config(&out_dir.join("config.txt"), &cfg)?;

            let client = connect(&cli.server).await?;
            let session = client
                .session_create(&api::CreateSessionRequest {
                    buffer: api::BufferParams {
                        capacity: cfg.buffer_capacity,
                        voxel_size: cfg.voxel_size,
                        min_points_per_voxel: cfg.min_points_per_voxel,
                    },
                    ghpr: api::GhprParams {
                        gamma: cfg.gamma,
                        ..api::GhprParams::at(cfg.viewpoint)
                    },
                    traversability: api::TravParams {
                        alpha_max_deg: cfg.alpha_max_deg,
                        dh_max: cfg.dh_max,
                    },
                })
                .await?
                .session_id;

            let result = async {
                for (index, (file, (timestamp, pose))) in
                    files.iter().zip(pose_rows.iter()).enumerate()
                {
                    let cloud = io::read_cloud(file)?;
                    client
                        .session_push_scan(
                            session,
                            &api::PushScanRequest {
                                cloud,
                                pose: api::PoseDto::from_pose(pose),
                                timestamp: *timestamp,
                            },
                        )
                        .await?;
                    let frame = client
                        .session_frame(
                            session,
                            &api::FrameRequest {
                                target: api::PoseDto::from_pose(pose),
                                include_mesh: true,
                            },
                        )
                        .await?;
                    let mesh_path = out_dir.join(format!("frame_{index:05}_mesh.ply"));
                    let map_path = out_dir.join(format!("frame_{index:05}_navmap.ply"));
                    if let (Some(mesh), Some(labels)) = (&frame.mesh, &frame.face_labels) {
                        io::write_mesh(&mesh_path, mesh, labels)?;
                    }
                    io::write_navmap(&map_path, &frame.navmap)?;
                    println!(
                        "frame {index:05}: {} assembled points, {} map points -> {}",
                        frame.assembled_points,
                        frame.navmap.len(),
                        map_path.display()
                    );
                }
                Ok(())
            }
            .await;
            client.session_delete(session).await.ok();
            result
        }
        Command::Query {
            navmap,
            nearest,
            project,
            collide,
        } => {
            let map = io::read_navmap(&navmap)?;
            let client = connect(&cli.server).await?;
            if let Some(text) = nearest {
                let q = parse_triple(&text, "--nearest")?;
                let response = client
                    .query_nearest(&api::NearestRequest { navmap: map, query: q })
                    .await?;
                let n = response.nearest;
                println!(
                    "index={} point=({:.6},{:.6},{:.6}) normal=({:.6},{:.6},{:.6}) traversable={} distance={:.6}",
                    n.index,
                    n.point.x,
                    n.point.y,
                    n.point.z,
                    n.normal.x,
                    n.normal.y,
                    n.normal.z,
                    n.traversable,
                    n.distance
                );
            } else if let Some(text) = project {
                let v = parse_numbers(&text, 4, "--project")?;
                let response = client
                    .query_project(&api::ProjectRequest {
                        navmap: map,
                        state: Se2State::new(v[0], v[1], v[2].to_radians()),
                        z_ref: v[3],
                    })
                    .await?;
                let p = response.pose;
                println!(
                    "pose: x={:.6} y={:.6} z={:.6} qw={:.6} qx={:.6} qy={:.6} qz={:.6}",
                    p.x, p.y, p.z, p.qw, p.qx, p.qy, p.qz
                );
            } else if let Some(parts) = collide {
                let pose_v = parse_numbers(&parts[0], 7, "POSE")?;
                let box_v = parse_numbers(&parts[1], 4, "BOX")?;
                let response = client
                    .query_collide(&api::CollideRequest {
                        navmap: map,
                        pose: api::PoseDto {
                            x: pose_v[0],
                            y: pose_v[1],
                            z: pose_v[2],
                            qw: pose_v[3],
                            qx: pose_v[4],
                            qy: pose_v[5],
                            qz: pose_v[6],
                        },
                        robot: RobotBox {
                            length: box_v[0],
                            width: box_v[1],
                            height: box_v[2],
                            z_offset: box_v[3],
                        },
                    })
                    .await?;
                let r = response.report;
                println!(
                    "in_collision={} offending={:?}",
                    r.in_collision, r.offending_indices
                );
            }
            Ok(())
        }
        Command::SynthEval {
            slope_min,
            slope_max,
            step,
            trials,
            seed,
            gamma,
            include_rim,
            out,
        } => {
            let client = connect(&cli.server).await?;
            let response = client
                .eval_sweep(&api::SweepRequest {
                    template: SceneSpec {
                        seed,
                        ..SceneSpec::default()
                    },
                    config: SweepConfig {
                        slope_min_deg: slope_min,
                        slope_max_deg: slope_max,
                        step_deg: step,
                        trials,
                        include_rim,
                        gamma,
                    },
                })
                .await?;
            std::fs::write(&out, response.table.to_csv())
                .map_err(|e| CliError::Data(format!("{}: {e}", out.display())))?;
            for method in [Method::Ovpc, Method::Pca] {
                if let Some((mean, std, n)) = response.table.overall(method) {
                    println!("{method}: mean {mean:.3} deg, std {std:.3} deg over {n} normals");
                }
            }
            println!("table -> {}", out.display());
            Ok(())
        }
        Command::Bench {
            input,
            iterations,
            viewpoint,
            out,
        } => {
            let viewpoint = parse_triple(&viewpoint, "--viewpoint")?;
            let files = cloud_files(&input)?;
            let mut clouds = Vec::with_capacity(files.len());
            for file in &files {
                clouds.push(io::read_cloud(file)?);
            }
            let client = connect(&cli.server).await?;
            let response = client
                .bench(&api::BenchRequest {
                    clouds,
                    ghpr: api::GhprParams::at(viewpoint),
                    traversability: api::TravParams::default(),
                    iterations,
                })
                .await?;
            std::fs::write(&out, response.stats.samples_csv())
                .map_err(|e| CliError::Data(format!("{}: {e}", out.display())))?;
            for (i, file) in files.iter().enumerate() {
                println!("cloud {i}: {}", file.display());
            }
            print!("{}", response.stats.summary());
            println!("samples -> {}", out.display());
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            use clap::error::ErrorKind;
            let code = match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    print!("{err}");
                    return ExitCode::SUCCESS;
                }
                _ => EXIT_USAGE,
            };
            eprint!("{err}");
            return ExitCode::from(code);
        }
    };
    let runtime = match tokio::runtime::Runtime::new() {
        Ok(rt) => rt,
        Err(err) => {
            eprintln!("error: failed to start runtime: {err}");
            return ExitCode::from(EXIT_PIPELINE);
        }
    };
    match runtime.block_on(run(cli)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {}", err.message());
            ExitCode::from(err.exit_code())
        }
    }
}
